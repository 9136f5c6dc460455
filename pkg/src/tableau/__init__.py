from .arith import Arithmetic, DirectArithmetic, RecordingArithmetic, VectorArithmetic
from .simulate import (
    AlgorithmResult,
    CandidatePack,
    CandidateSource,
    SimulationReport,
    algorithm1,
    algorithm2,
    candidate_pack,
    simulate,
)
from .vectors import decode_vector, encode_vector, eq_vec, gt_vec, make_O, make_O_pow2, make_U
from .verify import (
    Check,
    StepFragment,
    TableauCircuit,
    Verdict,
    rejection_reason,
    run_checks,
    step_fragment,
    verify_tableau,
)
from .witness import Tableau, TableauWitness, build_tableau, make_witnesses, witnesses_for
