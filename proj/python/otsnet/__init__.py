"""Python bindings for the otsnet scene text recognizer.

The compiled extension provides the model, the synthetic corpus generator,
the attention mask and quantizer primitives, metrics and the command runner.
"""

from otsnet._otsnet import (
    CheckpointError,
    ConfigError,
    ContractError,
    DimensionError,
    IndexError,
    Model,
    NumericError,
    build_mask,
    char_similarity,
    config,
    edit_distance,
    gradcheck,
    gumbel_noise,
    gumbel_softmax,
    lambda_value,
    lr_schedule,
    render_text,
    run_command,
    score,
    synth_generate,
)

__all__ = [
    "CheckpointError",
    "ConfigError",
    "ContractError",
    "DimensionError",
    "IndexError",
    "Model",
    "NumericError",
    "build_mask",
    "char_similarity",
    "config",
    "edit_distance",
    "gradcheck",
    "gumbel_noise",
    "gumbel_softmax",
    "lambda_value",
    "lr_schedule",
    "render_text",
    "run_command",
    "score",
    "synth_generate",
]

__version__ = "0.1.0"
