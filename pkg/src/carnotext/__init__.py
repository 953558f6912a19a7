"""Carnot groups, horizontal curves and Lipschitz disk extensions in Allcock groups."""
from .algebra import (GradedAlgebra, engel, free_two_step, gauge_constants, h_type, heisenberg,
                      parabolic, upper_triangular)
from .allcock import (AllcockGroup, ModelAlgebra, build_allcock, complexified_heisenberg_model,
                      cyclic_model, heisenberg_model, model_isotropic_kit,
                      multi_heisenberg_model, parse_model, quaternionic_model, theta_area)
from .contact import (check_horizontal, contact_residual_curve, horizontal_length,
                      horizontal_lift, piecewise_horizontal_approx)
from .errors import (AdmissibilityError, AlgebraError, CarnotError, DataFormatError,
                     HorizontalityError, InputError, NumericalError, UnsupportedModelError)
from .extension import (build_disk_extension, extend_group_loop, pullback_omega_residual,
                        vertical_completion)
from .grids import DiskMap, HomotopyGrid
from .isoperimetry import (graph_area, h_jacobian, homotopy_area_breakdown,
                           isoperimetric_ratio, riemannian_comparison, sr_area)
from .obstruction import free52_obstruction
from .paths import SampledPath, read_curve_csv, write_curve_csv

__version__ = "0.1.0"
