"""Python bindings for the Quant GAN pipeline."""

from ._core import (
    CheckpointError,
    DataError,
    NumericError,
    acf,
    dy_metric,
    echo_config,
    emd,
    fit_lambert,
    garch_fit,
    garch_simulate,
    lambert_forward,
    lambert_inverse,
    lambert_w0,
    leverage_effect,
    load_csv,
    log_returns,
    pipeline_apply,
    pipeline_invert,
    preprocess_prices,
    prices_from_returns,
    receptive_field,
    run_evaluate,
    run_garch,
    run_generate,
    run_preprocess,
    run_train,
    sample_log_returns,
)

__all__ = [name for name in dir() if not name.startswith("_")]
