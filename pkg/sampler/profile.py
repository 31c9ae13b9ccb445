import logging

from core.field import LatticeField, MacroProfile

log = logging.getLogger(__name__)


def empirical_profile(field: LatticeField, free_right: bool = False, contacts: int = None) -> MacroProfile:
    """Rescaled profile ``h_N(k / N) = phi_k / N^2``, linearly interpolated.

    The slots at -1 and N + 1 become the extension values at -1/N and 1 + 1/N.
    """
    N = field.N
    scale = float(N * N)
    values = field.sites(0, N) / scale
    return MacroProfile(
        N=N,
        values=values,
        left_ext=field[-1] / scale,
        right_ext=field[N + 1] / scale,
        free_right=free_right,
        contacts=contacts,
    )


def contact_number(field: LatticeField) -> int:
    """Number of sites in 1..N holding an exact zero."""
    return int((field.sites(1, field.N) == 0.0).sum())
