"""
pdfade oracles
Brute-force and sampling references the library is checked against
"""
from .moments import MomentsOracle, oracle_moments
from .enumeration import oracle_q_exhaustive
from .golden import (
    GoldenRecord,
    build_derived_records,
    check_record,
    evaluate_record,
    load_golden_records,
    write_golden_records,
)

__all__ = [
    'MomentsOracle',
    'oracle_moments',
    'oracle_q_exhaustive',
    'GoldenRecord',
    'build_derived_records',
    'check_record',
    'evaluate_record',
    'load_golden_records',
    'write_golden_records',
]
