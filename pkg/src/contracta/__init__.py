"""Sample-based certification and falsification of contraction classes on b-metric spaces."""

from .classifiers import (CERTIFIED, FALSIFIED, INCONCLUSIVE, ClassifyConfig, ClassVerdict,
                          DeltaSchedule, HierarchyPlacement, PhiSpec, AlphaSpec, Witness,
                          check_boyd_wong, check_geraghty, check_leader, check_matkowski,
                          check_meir_keeler, check_nonexpansive, classify, replay_witness)
from .config import RunConfig, dump_config, load_config, parse_config
from .corpus import InstanceDescriptor, get_instance, list_instances
from .errors import (ArgumentError, AuditError, ClosureError, ConfigError, ContractaError,
                     DomainError, EvaluationError, ExpressionSyntaxError)
from .expr import Expression, eval_expression
from .orbit import (Orbit, SelfMap, cauchy_table, detect_unbounded, orbit_diameter, picard,
                    solve_fixed_point)
from .probe import IndexFamily, Member, SigmaReport, probe, sigma_mnp
from .report import emit_report
from .space import (AxiomReport, BMetricSpace, DistanceSpec, DomainDescriptor, SampleSet,
                    distance, estimate_s, grid_triples, is_bounded, sample_pairs, subset_diameter,
                    verify_axioms)

__version__ = "0.1.0"
