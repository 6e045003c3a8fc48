"""Constants shared by the stages, the storage layer and the handler."""

# Stage names, in execution order
STAGE_GENERATE = "generate"
STAGE_SAMPLE = "sample"
STAGE_ESTIMATE = "estimate"
STAGE_KERNELS = "kernels"
STAGE_CLASSIFY = "classify"
STAGE_REPORT = "report"

STAGES = [
    STAGE_GENERATE,
    STAGE_SAMPLE,
    STAGE_ESTIMATE,
    STAGE_KERNELS,
    STAGE_CLASSIFY,
    STAGE_REPORT,
]

# Status values logged and returned by the handler
GENERATE_IN_PROGRESS = "GENERATE_IN_PROGRESS"
GENERATE_COMPLETE = "GENERATE_COMPLETE"
GENERATE_FAILED = "GENERATE_FAILED"
SAMPLE_IN_PROGRESS = "SAMPLE_IN_PROGRESS"
SAMPLE_COMPLETE = "SAMPLE_COMPLETE"
SAMPLE_FAILED = "SAMPLE_FAILED"
ESTIMATE_IN_PROGRESS = "ESTIMATE_IN_PROGRESS"
ESTIMATE_COMPLETE = "ESTIMATE_COMPLETE"
ESTIMATE_FAILED = "ESTIMATE_FAILED"
KERNELS_IN_PROGRESS = "KERNELS_IN_PROGRESS"
KERNELS_COMPLETE = "KERNELS_COMPLETE"
KERNELS_FAILED = "KERNELS_FAILED"
CLASSIFY_IN_PROGRESS = "CLASSIFY_IN_PROGRESS"
CLASSIFY_COMPLETE = "CLASSIFY_COMPLETE"
CLASSIFY_FAILED = "CLASSIFY_FAILED"
REPORT_IN_PROGRESS = "REPORT_IN_PROGRESS"
REPORT_COMPLETE = "REPORT_COMPLETE"
REPORT_FAILED = "REPORT_FAILED"


def stage_status(stage: str, state: str) -> str:
    """Return the status constant for a stage, e.g. ``("sample", "COMPLETE") -> "SAMPLE_COMPLETE"``."""
    return f"{stage.upper()}_{state}"


# File layout under the output directory
V_BUNDLES_DIR = "bundles"
V_SAMPLES_DIR = "samples"
V_ESTIMATES_DIR = "estimates"
V_KERNELS_DIR = "kernels"
V_CLASSIFY_DIR = "classify"
V_REPORTS_DIR = "reports"

V_BUNDLE_SUFFIX = ".yaml"
V_SAMPLES_SUFFIX = ".ndjson"
V_ESTIMATE_SUFFIX = ".yaml"
V_KERNEL_REPORT_FILE = "kernel_report.yaml"
V_MODEL_FILE = "model.yaml"
V_ACCURACY_FILE = "accuracy.yaml"
V_REPORT_SUFFIX = ".tsv"

# Report series written by the report stage, in file-name order
REPORT_SERIES = [
    "accuracy_vs_n",
    "kernel_convergence",
    "kernel_histograms",
    "kernel_separation",
    "kernel_stats",
    "orbit_clouds",
    "parity",
    "photon_number",
]

V_CONFIG_FILE_YAML = ".yaml"
V_CONFIG_FILE_YML = ".yml"
V_CONFIG_FILE_JSON = ".json"

# Versions embedded in every artifact
SCHEMA_VERSION = 1
GENERATOR_VERSION = "pcg64-seedsequence-block256-v1"
MLP_FORMAT_VERSION = 1

# Samples are generated in fixed blocks, each with its own stream
SAMPLE_BLOCK_SIZE = 256

# Numerical limits and tolerances
MAX_HAFNIAN_SIZE = 22
MAX_PERMANENT_SIZE = 20
MAX_THERMAL_PHOTONS = 16
MAX_MATCHING_ORACLE_NODES = 14
MAX_ENUMERATION = 1_000_000
SQUEEZING_CAP = 0.95
SOURCE_TAIL_MASS = 1e-9
SYMMETRY_TOLERANCE = 1e-10
UNITARY_TOLERANCE = 1e-10

# Orbit multiplicities in scope: [1,...,1], [2,1,...,1], [2,2,1,...,1]
ORBIT_DOUBLES = (0, 1, 2)

# Desk-scale defaults
DEFAULT_PHOTON_SECTORS = [4, 6, 8]
DEFAULT_CIRCUITS_PER_CLASS = 20
DEFAULT_SAMPLE_COUNT = 10_000
DEFAULT_MC_DRAWS = 2000
DEFAULT_SEED = 1234
DEFAULT_HIDDEN = [32, 16]
DEFAULT_EPOCHS = 20
DEFAULT_LEARNING_RATE = 1e-2
DEFAULT_MOMENTUM = 0.9
DEFAULT_BATCH_SIZE = 32
DEFAULT_TEST_FRACTION = 0.2
DEFAULT_REPEATS = 10
DEFAULT_KERNEL_THRESHOLD = 3.0
DEFAULT_HISTOGRAM_BINS = 50
BATCHNORM_MOMENTUM = 0.1
BATCHNORM_EPS = 1e-5
LOG_FEATURE_FLOOR = 1e-9
