import json
import logging
import sys

import numpy as np


class JsonEncoder(json.JSONEncoder):
    """Convert numpy classes to JSON serializable objects."""

    def default(self, obj):
        if isinstance(obj, (np.integer, np.floating, np.bool_)):
            return obj.item()
        elif isinstance(obj, np.ndarray):
            return obj.tolist()
        else:
            return super(JsonEncoder, self).default(obj)


def serialize(obj, max_depth=5):
    """
        dump into json, including only basic types, list types and dict types. Integers wider than
        64 bits are written as 0x-prefixed hex strings, other types are converted into string.
    """
    if max_depth <= 0:
        return str(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (float, str)):
        return obj
    if isinstance(obj, int):
        return obj if obj.bit_length() <= 64 else hex(obj)
    elif isinstance(obj, (list, tuple, set, frozenset)):
        return [serialize(item, max_depth - 1) for item in obj]
    elif isinstance(obj, dict):
        return {str(key): serialize(obj[key], max_depth - 1) for key in obj}
    elif hasattr(obj, "value") and hasattr(obj, "name") and not hasattr(obj, "__dict__"):
        return obj.value
    elif hasattr(obj, '__dict__'):
        return serialize(obj.__dict__, max_depth)
    else:
        return str(obj)


def format_int(value: int, hex_threshold: int = 64) -> str:
    if value.bit_length() > hex_threshold:
        return hex(value)
    return str(value)


def parse_int(text: str) -> int:
    text = text.strip().replace("_", "")
    if text.lower().startswith("0x"):
        return int(text, 16)
    if text.lower().startswith("0b"):
        return int(text, 2)
    return int(text)


def print_progress(*args, **kwargs):
    print(*args, **kwargs)


def setup_logging(verbose: bool = False):
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


def read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as f:
        return f.read()
