"""Quadrics of revolution as reciprocals of solutions of a second-order
system on the sphere: residual evaluation, the closed-form family, and
fitting/classification from radial data."""
from .errors import *  # noqa: F401,F403
from .fitting import (FitResult, RadialSample, Tolerances, classify, fit_arrays,
                      fit_inverse_radial, verify_arrays, verify_solution)
from .quadric import (GeometricElements, Kind, QuadricParams, SolutionParams, domain_indicator,
                      focal_quadric, geometric_elements, lift, parse_kind, quadric_to_solution,
                      radial, radial_array, sample_directions, sample_surface,
                      solution_to_quadric)
from .residuals import (ResidualReport, eq1_residual, eq1k_residual, obata_residual,
                        obata_shifted_residual, residual_report, s_constancy, s_field,
                        schouten_residual, trace_residual)
from .sphere import (AffineField, GenericField, SpherePoint, TangentFrame, convergence_scan,
                     gradient, hessian, laplacian, project_to_sphere, sample_sphere,
                     tangent_frame)

__version__ = "0.1.0"
