"""lfsweep: plane-sweep light field quilt rendering for radiance-field scenes.

Renders 3D Gaussian splat and sparse voxel scenes into light field display
quilts via a single shared pass over forward-sweeping planes, alongside a
conventional per-view renderer that serves as the quality oracle.  Includes
a lenticular interlacer, quality/timing harnesses, and an interactive HTTP
render service.
"""

from .config import DisplayConfig, load_display_config, save_display_config
from .errors import ConfigurationError, GeometryError, SceneFormatError
from .geometry import (
    CameraPose,
    QuiltViewParams,
    ReferenceCamera,
    forward_distance,
    plane_pixel_grid,
    project_quilt_to_plane,
    quilt_view_params,
    reference_camera,
)
from .scene import (
    GaussianScene,
    SceneSource,
    VoxelScene,
    eval_sh,
    generate_synthetic,
    load_gaussian_ply,
    load_voxels,
    save_gaussian_ply,
    save_voxels,
)
from .chunking import ChunkPartition, build_partition, cull_and_depth, quantile_chunk
from .raster import (
    PlaneStack,
    Splat2D,
    adaptive_filter_strength,
    lowpass_planes,
    project_gaussian,
    rasterize_chunks,
    render_perspective,
)
from .swizzle import Quilt, blend_order_check, sample_plane, swizzle_blend
from .interlace import (
    CalibrationProfile,
    interlace,
    load_calibration,
    save_calibration,
    simulate_misalignment,
    subpixel_view_index,
)
from .metrics import compare_quilts, psnr, ssim
from .pipeline import render_baseline_quilt, render_sweep_quilt

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
