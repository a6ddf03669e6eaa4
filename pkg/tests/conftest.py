import numpy as np

from soul_lab import profiles as pr
from soul_lab import quotient as qt


def product_spec():
    return qt.QuotientSpec(
        pr.round_profile(1.0), pr.cap_plane(1.4), pr.KillingSpec(0.0, 0.0), "product"
    )


def round_soul_spec():
    prof = qt.prescribe_soul_profile(pr.round_profile(0.5), 1.0)
    return qt.QuotientSpec(
        prof, pr.flat_plane(2.0), pr.KillingSpec(1.0, 1.0), "round-soul"
    )


def asym_spec():
    return qt.QuotientSpec(
        pr.round_profile(1.0), pr.cap_plane(1.4), pr.KillingSpec(2.0, 0.5), "asym"
    )


def spline_spec():
    t = np.linspace(0, np.pi, 80)
    return qt.QuotientSpec(
        pr.spline_profile(np.sin(t)),
        pr.flat_plane(2.0),
        pr.KillingSpec(1.0, 1.0),
        "spline",
    )


def tanh_twist_spec():
    return qt.QuotientSpec(
        pr.round_profile(1.0), pr.tanh_plane(2.0), pr.KillingSpec(0.5, 2.0), "tanh-twist"
    )


def all_specs():
    return [
        product_spec(),
        round_soul_spec(),
        asym_spec(),
        spline_spec(),
        tanh_twist_spec(),
    ]
