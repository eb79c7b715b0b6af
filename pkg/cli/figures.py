"""
Data bundle behind the (q, sigma) existence/nonexistence picture.
Emits tables only; rendering is left to whatever plotting tool reads the CSVs.
"""

import os
from typing import Dict, Optional, Sequence, Tuple

import pandas as pd

from analysis.exponents import region_annotations, hardy_constants, is_double_root, region_polyline
from utils.data_export import write_csv
from utils.errors import ConfigError


def region_dataset(p: float, N: int, mu_list: Sequence[float],
                    q_range: Tuple[float, float] = (-3.0, 6.0), step: float = 0.05,
                    out_dir: Optional[str] = None) -> Dict[str, pd.DataFrame]:
    """
    One boundary polyline per mu plus the labeled points of each panel.

    Boundary rows carry `included`: whether (q, Lambda*(q)) itself belongs to the
    nonexistence set. At mu = C_H only the half-line q >= -1 does; the kink
    (p-1, p) never does.

    Returns:
        dict: {'boundary': DataFrame(mu, q, lambda_star, included),
               'annotations': DataFrame(mu, label, q, sigma, on_boundary, marker)}
    """
    c_h, _, _ = hardy_constants(p, N)
    boundaries, annotations = [], []
    for mu in mu_list:
        if mu > c_h and not is_double_root(mu, c_h):
            raise ConfigError(f"mu={mu} exceeds C_H={c_h}: no boundary to draw")
        poly = region_polyline(p, N, mu, q_range, step)
        included = poly['q'] != p - 1
        if is_double_root(mu, c_h):
            included &= poly['q'] >= -1
        poly.insert(0, 'mu', mu)
        poly['included'] = included
        boundaries.append(poly)

        marks = region_annotations(p, N, mu)
        marks.insert(0, 'mu', mu)
        annotations.append(marks)

    bundle = {'boundary': pd.concat(boundaries, ignore_index=True),
              'annotations': pd.concat(annotations, ignore_index=True)}
    if out_dir is not None:
        for name, frame in bundle.items():
            write_csv(frame, os.path.join(out_dir, f"region_{name}.csv"), schema=f"region_{name}")
    return bundle
