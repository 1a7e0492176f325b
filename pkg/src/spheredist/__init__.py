"""Lattice spheres, spherical averages and distance dichotomies on finite boxes and tori."""

__version__ = "0.1.0"

from .errors import CapacityError, PaddingError, ParameterError, ParseError, SphereDistError
from .lattice_sphere import (
    Sphere,
    cached_sphere,
    enumerate_sphere,
    representation_count,
    representation_counts,
    translated_intersection_count,
)
from .pointset import PointSet, parse_pointset, read_pointset, write_pointset
from .spectral import GridFunction, Spectrum, dft, idft, grid_from_pointset, sigma_hat, sigma_hat_grid
from .arithmetic import (
    ArcSystem,
    GaussSumParams,
    continuous_sphere_ft,
    gauss_sum,
    in_annulus,
    in_major_arcs,
    multiplier_m,
    q_eta,
    verify_keyu,
)
from .averaging import l2_ratio, maximal_average, mollified_maximal, spherical_average
from .density import box_density, density_increment, generate_set, uniformity_test
from .verify import (
    count_identity_check,
    dichotomy_report,
    dichotomy_report_pinned,
    pinned_check,
    unpinned_check,
)
