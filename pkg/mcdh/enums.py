from subtypes import Enum


class Enums:
    class ModelKind(Enum):
        """Enum of estimable model specifications. MCDH plus the five comparison models."""
        MCDH, LOGIT, LOGIT_INFO, OFFSETS, OFFSETS_INFO, GPDH = "mcdh", "logit", "logit-info", "offsets", "offsets-info", "gpdh"

    class Preset(Enum):
        """Enum of named simulation presets."""
        PAPER_SEC4, DESK_SMALL, SPARSE_CATEGORY, TINY = "paper-sec4", "desk-small", "sparse-category", "tiny"

    class ErrorCategory(Enum):
        """Enum of machine-readable error categories reported by the command line."""
        USAGE, CONFIG, SCHEMA, NUMERICAL, CONSISTENCY, VERSION, INTERNAL = "usage", "config", "schema", "numerical", "consistency", "version", "internal"

