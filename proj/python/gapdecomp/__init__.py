"""Logit estimation, diagnostics and nonlinear decomposition of group gaps."""

import json as _json

from ._core import (
    GapdecompError,
    auc,
    auc_concordance,
    fairlie_decompose,
    fit_logit,
    link_test,
    log_likelihood,
    logistic,
    oaxaca_linear,
    percentage_contributions,
    predict,
    roc_curve,
    run_cli,
    score,
    vif,
)
from ._core import simulate as _simulate

__all__ = [
    "GapdecompError",
    "auc",
    "auc_concordance",
    "fairlie_decompose",
    "fit_logit",
    "link_test",
    "log_likelihood",
    "logistic",
    "oaxaca_linear",
    "percentage_contributions",
    "predict",
    "roc_curve",
    "run_cli",
    "score",
    "simulate",
    "vif",
]


def simulate(dgp, seed=None):
    """Draw both groups from a data-generating process (dict, JSON text or path)."""
    if isinstance(dgp, dict):
        text = _json.dumps(dgp)
    elif isinstance(dgp, str) and dgp.lstrip().startswith("{"):
        text = dgp
    else:
        with open(dgp, encoding="utf-8") as f:
            text = f.read()
    return _simulate(text, seed)
