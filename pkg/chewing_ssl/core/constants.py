"""Constants used throughout the application."""

# Signal chain
TARGET_RATE_HZ = 2000.0
HIGHPASS_CUTOFF_HZ = 20.0
HIGHPASS_ORDER = 4
ANTIALIAS_TAPS_PER_FACTOR = 8
ANTIALIAS_CUTOFF_RATIO = 0.9

# Windowing (5 s at 2 kHz)
WINDOW_LEN = 10000
TRAIN_STRIDE = 10000
INFERENCE_STRIDE = 2000
COVERAGE_THRESHOLD = 0.5

# Network dimensions
FEATURE_DIM = 512
PROJECTION_DIM = 128
GNL_HIDDEN = 512
HEAD_HIDDEN = 200
POOLED_LEN = 8

# Post-processing rules
SCORE_THRESHOLD = 0.5
CHEW_MERGE_GAP_S = 2.0
MIN_BOUT_S = 5.0
BOUT_MERGE_GAP_S = 60.0
MIN_BOUT_RATIO = 0.25

# Temperatures swept on the development subjects
TAU_SWEEP = (0.1, 0.5, 1.0, 5.0, 10.0, 50.0, 100.0)

# Classifier variants: frozen stack feeding h
VARIANT_LINEAR = "linear"
VARIANT_NONLINEAR = "nonlinear"
VARIANT_NONLINEAR_RETAIN = "nonlinear_retain"
VARIANT_SUPERVISED = "supervised"
SSL_VARIANTS = (VARIANT_LINEAR, VARIANT_NONLINEAR, VARIANT_NONLINEAR_RETAIN)
VARIANT_LABELS = {
    VARIANT_LINEAR: "h∘f^L",
    VARIANT_NONLINEAR: "h∘f^NL",
    VARIANT_NONLINEAR_RETAIN: "h∘g^NL_1∘f^NL",
    VARIANT_SUPERVISED: "supervised h∘f",
}
