from .field import Field
from .fieldio import dumps, load, loads, save
from .functionals import (
    FunctionalValue, concentration_integral, energy, functional, hdot_norm, lp_norm,
    lpb_integral, lpb_norm, mass, tail_fraction, weinstein,
)
from .grids import CartesianGrid, RadialGrid, sphere_area
from .operators import biharmonic_apply, fractional_laplacian_apply, laplacian_apply, rescale_field
from .refinement import RefinementResult, grid_refinement_estimate
