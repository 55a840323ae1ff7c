"""Reproducibility artifact for an extremal model."""
from pathlib import Path

import numpy as np

from app.core.domain.report_models import ExtremalModel


def write_extremal_artifact(model: ExtremalModel, path: Path) -> Path:
    """F and F' on their phi grid, T, the time map and the tabulated coefficients a, b, c."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = {
        "delta": np.array(model.delta),
        "period": np.array(model.period),
        "phi": model.curve.phi_grid,
        "F": model.curve.F,
        "dF": model.curve.dF,
        "tau": model.tau,
    }
    if model.coeffs is not None:
        arrays["coeff_t"] = model.coeffs.table_t
        arrays["coeff_abc"] = model.coeffs.table
    np.savez_compressed(path, **arrays)
    # savez appends .npz when missing
    return path if path.suffix == ".npz" else path.with_name(path.name + ".npz")
