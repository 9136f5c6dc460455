from __future__ import annotations
from dataclass_wizard import JSONSerializable, YAMLWizard
from dataclasses import dataclass, field
from typing import Dict, Optional, Union


@dataclass
class YAMLConfig(YAMLWizard):
    module: str = ""  # Task module
    parameters: dict = field(default_factory=dict)  # Task parameters

    def create(self):
        path = ".".join(self.module.split(".")[:-1])
        mod = __import__(path, fromlist=[self.module.split(".")[-1]])
        return getattr(mod, self.module.split(".")[-1])(**self.parameters)

    @classmethod
    def create_from_yaml(cls, yaml_path: str, update_parameters: Union[None, Dict] = None):
        config = cls.from_yaml_file(yaml_path)
        if update_parameters:
            config.parameters.update(update_parameters)
        config.parameters["src"] = yaml_path
        return config.create()


@dataclass
class Budgets(JSONSerializable, YAMLWizard):
    direct_bits: int = 1 << 16  # largest value the direct oracle may build
    el_bit_cap: int = 1 << 20  # expansion-limit recurrence stops past this many bits
    max_steps: int = 100000  # RAM / TM step budget
    witness_bits: int = 1 << 22  # largest integer a witness verifier may build
    exhaustive_bits: int = 12  # largest T for exhaustive U^T candidate packs
    iterations: int = 8  # rounds of the doubling tape-bound search
    value_bits: int = 1 << 24  # RAM register cap
    lazy_cache: int = 4096  # entries per memo table of a lazy evaluator

    @classmethod
    def load(cls, path: Optional[str] = None, **overrides) -> "Budgets":
        budgets = cls.from_yaml_file(path) if path else cls()
        for key, value in overrides.items():
            if value is not None:
                setattr(budgets, key, value)
        return budgets


DEFAULT_BUDGETS = Budgets()
