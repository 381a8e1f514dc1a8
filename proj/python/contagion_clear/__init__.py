"""Clearing engine for interbank networks with contingent payments."""

from ._core import (
    BranchRecord,
    ClearingResult,
    ComparisonReport,
    ConservationAudit,
    ContingentContract,
    ContractKind,
    ContractStructureError,
    DiagnosisVerdict,
    Direction,
    DynamicContract,
    DynamicRoute,
    DynamicSpec,
    DynamicState,
    FinancialNetwork,
    FundMode,
    InvalidInputError,
    LiabilitySpec,
    MonotonicityWitness,
    NonexistenceDiagnosis,
    NonspeculativeReport,
    NumericalError,
    RemovalPolicy,
    SensitivityReport,
    SolveOptions,
    ValidationReport,
    build_stability_fund,
    check_nonspeculative,
    clear_dynamic,
    clear_eisenberg_noe,
    clear_static,
    clearing_map,
    compare_static_dynamic,
    conservation_audit,
    detect_nonexistence,
    evaluate_liabilities,
    fictitious_default_static,
    make_liability_spec,
    residual,
    run_scenario_file,
    sensitivity_in_assets,
    validate_network,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
