"""dsplan: disassembly-sequence planning with a many-objective GA.

Library layout: ``model`` (types, dataset I/O), ``geomsim`` (voxel
simulator and synthetic products), ``ccg`` (contact-connection graph and
initializers), ``constraints`` (feasibility/stability checks),
``objectives`` (the four normalized objectives), ``nsga3`` (the planner),
``bench`` (experiment harness), ``cli`` (command line).
"""

__version__ = "0.1.0"

from .model import (
    Dataset,
    DatasetError,
    MissingTaskLabel,
    Motion,
    MotionTable,
    ParsedLabels,
    Part,
    PartCatalog,
    RelationMatrices,
    SchemaError,
    TransposeViolation,
    ValidationError,
    derive_constraint_degree,
    load_dataset,
    parse_labels,
    removal_order,
    save_dataset,
)
from .geomsim import VoxelAssembly, build_dataset, generate_synthetic
from .ccg import (
    ContactConnectionGraph,
    DisconnectedProduct,
    build_ccg,
    ccgi_init,
    fr_init,
    random_init,
    sfr_init,
)
from .constraints import ConstraintFlags, check, motion_feasible, order_feasible, stable
from .objectives import Evaluation, Evaluator, evaluate
from .nsga3 import (
    GaConfig,
    PlanResult,
    best_solution,
    break_and_join,
    crossover,
    cut_and_paste,
    das_dennis_points,
    mutate,
    niche_select,
    non_dominated_sort,
    run,
)
from .bench import ExperimentReport, ablation_run, emit_report, init_benchmark, single_objective_run

__all__ = [name for name in dir() if not name.startswith("_")]
