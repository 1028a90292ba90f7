"""Protocol configuration and seed discipline."""

from dataclasses import dataclass, field

from ..errors import ConfigInvalid, ModeNotPermittedInSecureProfile

HE_GC = "he-gc"
SECSH_GC = "secsh-gc"


@dataclass(frozen=True)
class Seeds:
    cloud: int = 1
    csp: int = 2
    data: int = 3


@dataclass(frozen=True)
class ProtocolConfig:
    construction: str
    tau: int
    p_max: int
    precision_bits: int = 7
    sigma: int = 40
    key_bits: int = 512
    ot_mode: str = "base"
    ot_group: str = "modp-768"
    gc_scheme: str = "half"
    seeds: Seeds = field(default_factory=Seeds)
    offline_base_apply: bool = False
    secure_profile: bool = False

    def __post_init__(self):
        if self.construction not in (HE_GC, SECSH_GC):
            raise ConfigInvalid(f"unknown construction {self.construction!r}")
        if self.tau < 1 or self.p_max < self.tau:
            raise ConfigInvalid("need p_max >= tau >= 1")
        if self.ot_mode not in ("base", "dealer"):
            raise ConfigInvalid(f"unknown OT mode {self.ot_mode!r}")
        if self.gc_scheme not in ("half", "classic"):
            raise ConfigInvalid(f"unknown GC scheme {self.gc_scheme!r}")
        if self.key_bits not in (512, 1024, 2048):
            raise ConfigInvalid("key_bits must be 512, 1024 or 2048")
        if self.secure_profile:
            if self.ot_mode == "dealer":
                raise ModeNotPermittedInSecureProfile(
                    "dealer OT is a test mode; secure profile requires base OT")
            if self.key_bits < 2048:
                raise ConfigInvalid("secure profile requires 2048-bit keys")


def paper_faithful(construction: str, tau: int, p_max: int,
                   seeds: Seeds = Seeds()) -> ProtocolConfig:
    """2048-bit keys, 2048-bit OT group, base OT."""
    return ProtocolConfig(construction=construction, tau=tau, p_max=p_max,
                          key_bits=2048, ot_group="modp-2048",
                          seeds=seeds, secure_profile=True)
