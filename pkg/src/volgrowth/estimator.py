"""Estimator-style front end: fit a growth function, transform lengths to z."""
from __future__ import annotations

from typing import Any, Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .assembly import (
    assemble,
    choose_nj,
    discrete_growth,
    growth_constant_bound,
    lemma16_bounds_check,
)
from .growth import IncrementsDiverge, check_bgd, growth_equivalent, limit_behavior, normalize
from .graph import build_gadget_graph, check_sandwich, distance_report
from .pieces import PieceCatalog, default_catalog, synthesize_params
from .tree import EndsLayout, LevelSet, build_tree, layout_from_tree, ray_layout
from .validation import check_growth_function


class GrowthSynthesizer(BaseEstimator, TransformerMixin):
    """Realize a growth function as an assembled plan and its discrete growth.

    ``fit`` runs normalization, interval selection, tree building, piece
    placement and (optionally) the gadget graph. ``transform`` maps lengths
    to z values.

    Parameters
    ----------
    horizon : int or None
        Number of tree levels; defaults to the growth function's horizon.
    layout : EndsLayout, dict or None
        Shape of the tree of pieces; a ray (one end) when omitted.
    catalog : PieceCatalog or None
    mode : {"auto", "factorial", "linear", "custom", "none"}
        Interval selection; ``auto`` picks factorial for diverging increments
        and linear otherwise; ``none`` leaves the trunk set empty.
    """

    def __init__(
        self,
        horizon: Optional[int] = None,
        layout: Any = None,
        catalog: Optional[PieceCatalog] = None,
        mode: str = "auto",
        kgap: int = 2,
        base: int = 1,
        C1: int = 2,
        C2: int = 4,
        starts: Optional[tuple] = None,
        normalize: bool = True,
        build_graph: bool = True,
        exponent_variant: str = "l",
        dilation_max: int = 64,
    ):
        self.horizon = horizon
        self.layout = layout
        self.catalog = catalog
        self.mode = mode
        self.kgap = kgap
        self.base = base
        self.C1 = C1
        self.C2 = C2
        self.starts = starts
        self.normalize = normalize
        self.build_graph = build_graph
        self.exponent_variant = exponent_variant
        self.dilation_max = dilation_max

    def _resolve_layout(self, horizon: int) -> EndsLayout:
        if self.layout is None:
            return layout_from_tree(ray_layout(horizon).to_dict(), record_degree_bound=False)
        if isinstance(self.layout, EndsLayout):
            return self.layout
        return layout_from_tree(self.layout)

    def fit(self, X: Any, y: Any = None) -> "GrowthSynthesizer":
        v = check_growth_function(X, self.horizon)
        self.v_ = v
        self.bgd_ = check_bgd(v)
        if self.normalize:
            self.w_, self.cert_ = normalize(v, dilation_max=self.dilation_max)
        else:
            self.w_, self.cert_ = v, growth_equivalent(v, v)
        H = self.w_.horizon
        self.layout_ = self._resolve_layout(H)
        self.catalog_ = self.catalog or default_catalog(max_boundary=max(3, _max_boundary(self.layout_)))
        self.params_ = synthesize_params(self.catalog_, self.layout_)
        mode = self.mode
        if mode == "auto":
            win = max(2, H // 4)
            mode = "factorial" if isinstance(limit_behavior(self.w_, win), IncrementsDiverge) else "linear"
        if mode == "none":
            self.S_ = LevelSet()
        else:
            self.S_ = choose_nj(self.params_, self.w_, mode, H, kgap=self.kgap, base=self.base,
                                C1=self.C1, C2=self.C2, starts=self.starts)
        self.mode_ = mode
        self.tree_ = build_tree(self.w_, self.S_, H, layout=self.layout_)
        mode_info = {"kind": mode, "kgap": self.kgap, "base": self.base, "C1": self.C1, "C2": self.C2}
        self.plan_ = assemble(self.tree_, self.S_, self.params_, self.catalog_, self.layout_, mode_info)
        self.z_ = discrete_growth(self.plan_)
        self.graph_ = build_gadget_graph(self.plan_, self.params_) if self.build_graph else None
        return self

    def transform(self, X: Any) -> np.ndarray:
        """z values at the given lengths (object array, exact entries)."""
        check_is_fitted(self, "z_")
        idx = np.asarray(X, dtype=np.int64).ravel()
        if idx.size and (idx.min() < 0 or idx.max() >= len(self.z_)):
            raise ValueError(f"lengths must lie in [0, {len(self.z_) - 1}]")
        return np.array([self.z_[int(i)] for i in idx], dtype=object)

    def certify(self) -> dict:
        """Run the band, growth-constant, distance and sandwich checks."""
        check_is_fitted(self, "z_")
        P = self.params_
        band = lemma16_bounds_check(self.z_, self.w_, P, self.S_)
        cert = growth_equivalent(self.z_.z, self.w_)
        L = self.bgd_.minimal_L if self.bgd_.is_bgd else None
        bounds = {}
        if L is not None:
            for variant in ("l", "L"):
                bounds[variant] = growth_constant_bound(L, P.l, P.u_R, P.h, P.H, variant)
        out = {
            "lemma16": band,
            "certificate": cert,
            "bounds": bounds,
            "within_bound": {k: (not cert.failed and b.admits(cert.A)) for k, b in bounds.items()},
        }
        if self.graph_ is not None:
            out["distance"] = distance_report(self.graph_, l=P.l)
            out["sandwich"] = check_sandwich(self.graph_, self.z_)
        return out


def _max_boundary(layout: EndsLayout) -> int:
    return max(len(k) + 1 for j in range(layout.depth + 1) for k in layout.children(j))
