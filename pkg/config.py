import os
from dotenv import load_dotenv

load_dotenv()


class RangeError(ValueError):
    """A frequency, length or band lies outside its admissible range"""


class ConfigurationError(ValueError):
    """Parameters are individually valid but inconsistent with each other"""


class ResourceError(RuntimeError):
    """The scattering cascade would materialize too many paths"""


# Signal grid (desk-scale defaults: 4 s at 16384 Hz)
SAMPLE_RATE = float(os.getenv("SCATTERING_SAMPLE_RATE", 2 ** 14))
SIGNAL_LENGTH = int(os.getenv("SCATTERING_SIGNAL_LENGTH", 2 ** 16))

# Filterbank configuration
GAMMATONE_ORDER = int(os.getenv("SCATTERING_GAMMATONE_ORDER", 4))
POOLING_T = float(os.getenv("SCATTERING_POOLING_T", 0.5))

# Heatmap experiment configuration
HEATMAP_F1 = float(os.getenv("SCATTERING_HEATMAP_F1", 2 ** 11))
HEATMAP_Q = 4
HEATMAP_OCTAVES = 9
HEATMAP_CELLS = int(os.getenv("SCATTERING_HEATMAP_CELLS", 32))

# Energy decay experiment configuration
DECAY_F1 = float(os.getenv("SCATTERING_DECAY_F1", 32))
DECAY_T = float(os.getenv("SCATTERING_DECAY_T", 0.5))
DECAY_Q = 1
DECAY_OCTAVES = 7

# Resource limits
MAX_PATHS = int(os.getenv("SCATTERING_MAX_PATHS", 20000))
MAX_WORKERS = int(os.getenv("SCATTERING_MAX_WORKERS", min(4, (os.cpu_count() or 1))))

# epsilon = EPSILON_RELATIVE * peak S1, guards empty bands in the S2/S1 ratio
EPSILON_RELATIVE = float(os.getenv("SCATTERING_EPSILON_RELATIVE", 1e-12))

# Output formatting (17 significant digits round-trip a double)
FLOAT_FORMAT = '.17g'
