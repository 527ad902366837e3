from enum import Enum
from dataclasses import dataclass, field, replace

from PythonScripts.FileManagement import extract_energy_defaults


class EnergyFamily(Enum):
    Ep = "Ep"
    Einfty = "Einfty"
    EpWithBarrier = "EpWithBarrier"
    Ecos = "Ecos"
    Emax = "Emax"
    Emin = "Emin"

    @property
    def is_additive(self) -> bool:
        """True for energies that are sums of per-cell terms (and therefore have local gradients)."""
        return self in (EnergyFamily.Ep, EnergyFamily.EpWithBarrier)

    @property
    def is_planar_only(self) -> bool:
        return self in (EnergyFamily.Ecos, EnergyFamily.Emax, EnergyFamily.Emin)


_defaults = extract_energy_defaults()


@dataclass(frozen=True)
class EnergyConfig:
    """
    Selects the energy to evaluate or minimize.

    :param family: Energy family.
    :param p: Power applied to each vertex term of E_p (even values keep the energy smooth).
    :param k_n: Target height ratio; each E_p term is |h/R / k_n - 1|^p, i.e. |2h/R - 1|^p at k_n = 1/2.
    :param barrier_weight: Coefficient of E_p in the barrier energy barrier_weight·E_p + E_imr.
    :param degenerate_hr: Height ratio assigned to degenerate cells; always -1.
    """
    family: EnergyFamily = EnergyFamily(_defaults["family"])
    p: int = int(_defaults["p"])
    k_n: float = float(_defaults["k_n"])
    barrier_weight: float = float(_defaults["barrier_weight"])
    degenerate_hr: float = field(default=-1.0, init=False)

    def __post_init__(self):
        if not isinstance(self.family, EnergyFamily):
            object.__setattr__(self, "family", EnergyFamily(self.family))

        if int(self.p) != self.p or self.p < 1:
            raise ValueError(f"p must be a positive integer, got {self.p}")

        if not 0.0 < self.k_n <= 1.0:
            raise ValueError(f"k_n must lie in (0, 1], got {self.k_n}")

        if self.barrier_weight <= 0.0:
            raise ValueError(f"barrier_weight must be positive, got {self.barrier_weight}")

    def with_power(self, p: int) -> "EnergyConfig":
        return replace(self, p=p)

    @property
    def label(self) -> str:
        """Short schedule-style label such as 'E4', '~E6' or 'Einfty'."""
        if self.family is EnergyFamily.Ep:
            return f"E{self.p}"
        if self.family is EnergyFamily.EpWithBarrier:
            return f"~E{self.p}"

        return self.family.value
