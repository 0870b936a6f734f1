"""Outcome matrices, completion and trapdoor experiments for the alternative LCU circuit."""

from ._core import (
    CircuitSpec,
    __version__,
    circuit_unitary,
    coefficient_matrix,
    dft_matrix,
    extract_target,
    factorized_complete,
    hadamard_attack,
    hadamard_matrix,
    haar_random_unitary,
    invert_with_c,
    invert_with_key,
    keygen,
    make_mask,
    observe,
    outcome_probabilities,
    output_matrix,
    random_public_params,
    random_state,
    recovery_errors,
    row_matrix,
    svd,
    svp_complete,
    als_complete,
    sweep_instance,
    eval_trapdoor,
    build_circuit,
    shuffle,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
