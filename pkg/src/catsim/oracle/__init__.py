from .fock import (FockVector, TwoModeFock, coherent_to_fock, fock_beam_splitter, fock_detect,
                   fock_detect_joint, fock_displace, fock_fidelity, fock_inner, fock_kerr)
from .checks import CheckResult, kerr_theta_pinning, run_checks
