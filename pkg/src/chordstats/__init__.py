"""Free path lengths of billiard trajectories in rectangular boxes.

Samplers for the two particle-termination models (fixed travel distance and
fixed bounce count) and for the invariant random-line chord ensemble;
closed-form limit densities in 2D/3D with their breakpoint structure;
empirical-distribution statistics; and recovery of the box side lengths
from the discontinuities of an observed free-path density.
"""

from .core import (
    Box,
    BounceCount,
    FixedStart,
    SampleSet,
    TotalDistance,
    TrajectoryConfig,
    UniformStart,
    sample_uniform_direction,
)
from .billiard import (
    CrossingEvent,
    iter_absorption_gaps,
    iter_spreading_gaps,
    sample_absorption,
    sample_spreading,
    trajectory_gaps,
    unfold_crossings,
)
from .lines import DirectedLine, chord_length, projected_shadow_area, sample_chords, total_line_measure
from .analytic import (
    Breakpoint,
    BreakpointKind,
    PiecewiseDensity,
    absorption_density_2d,
    cdf_spreading_2d,
    cdf_spreading_3d,
    cdf_spreading_3d_spherical,
    cdf_spreading_general,
    mean_free_path,
    pdf_absorption_2d,
    pdf_absorption_singular_2d,
    pdf_absorption_smooth_2d,
    pdf_spreading_2d,
    pdf_spreading_3d,
    positive_orthant_vn_integral,
    spreading_density_2d,
    spreading_density_3d,
)
from .stats import (
    EcdfSummary,
    Histogram,
    RecoveryConfig,
    RecoveryReport,
    ks_distance,
    ks_distance_binned,
    ks_two_sample_binned,
    recover_sides_2d,
    recover_sides_3d,
)

__version__ = "0.1.0"
