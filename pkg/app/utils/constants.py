"""
Application-wide constants and configuration values.
"""

# Exit codes
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_BAD_INPUT = 2
EXIT_BAD_CHECKPOINT = 3
EXIT_BAD_CONFIG = 4

# Middlebury .flo
FLO_MAGIC = 202021.25

# Checkpoint container
CHECKPOINT_MAGIC = b"VTKR"
CHECKPOINT_FORMAT_VERSION = 1
CHECKPOINT_SECTION_VERSION = 1
CHECKPOINT_SECTIONS = ("motion", "upsampler", "texture", "reconstruction")

# Metrics
PSNR_CAP_DB = 99.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5

# Numerics
NORM_EPSILON = 1e-6
CHARBONNIER_EPSILON = 1e-3
CENSUS_PATCH_SIZE = 7
CENSUS_SOFT_THRESHOLD = 0.1

# Triplet folder naming
TRIPLET_FILENAMES = ("im1.png", "im2.png", "im3.png")

# Error messages
ERROR_MESSAGES = {
    # Shape contracts
    "size_mismatch": "{what}: spatial size mismatch {left} vs {right}",
    "channel_mismatch": "{what}: expected {expected} channels, got {actual}",
    "not_divisible": "{what}: size {size} is not divisible by {divisor}",
    "invalid_time_step": "Time step must lie in [0, 1], got {t}",
    "invalid_argument": "{what}: {detail}",

    # Matching
    "match_out_of_grid": "Match index ({x}, {y}) lies outside the {h}x{w} texture grid",

    # Inputs
    "file_not_found": "Input file not found: {path}",
    "image_unreadable": "Cannot read image {path}: {detail}",
    "flo_bad_magic": "{path} is not a .flo file (magic {magic})",
    "flo_truncated": "{path} is truncated: expected {expected} values, got {actual}",
    "frames_size_mismatch": "Input frames differ in size: {left} vs {right}",
    "triplet_dir_empty": "No triplets found under {path}",
    "crop_too_large": "{path}: frames of {height}x{width} are smaller than the {crop} crop",

    # Checkpoints
    "checkpoint_not_found": "Checkpoint not found: {path}",
    "checkpoint_bad_magic": "{path} is not a checkpoint (magic {magic!r})",
    "checkpoint_bad_version": "{path}: unsupported checkpoint format version {version}",
    "checkpoint_corrupt": "{path}: corrupt checkpoint ({detail})",
    "checkpoint_mismatch": "Checkpoint configurations differ beyond the upsampler backend: {keys}",

    # Configuration
    "config_unknown_key": "Unknown configuration key: {key}",
    "config_bad_line": "{source}:{line}: expected 'key = value', got {text!r}",
    "config_invalid": "Invalid configuration: {detail}",
    "unknown_backend": "Unknown upsampler backend: {backend}",
    "unknown_loss_variant": "Unknown loss variant: {variant}",
    "unknown_metric_plugin": "No external metric registered under {name!r}",
    "unknown_backbone": "Unknown perceptual backbone: {name}",

    # Metrics
    "empty_mask": "Metric undefined: the mask selects no pixels",
    "image_too_small": "SSIM needs images of at least {minimum}x{minimum}, got {height}x{width}",

    # Training
    "non_finite_loss": "Non-finite loss {loss} at step {step}; diagnostics written to {path}",
}
