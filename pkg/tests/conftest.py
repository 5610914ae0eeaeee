import numpy as np
import pytest

F04_ANGLES = (72.24, 17.76, 45.0, 0.0)
MAXIMAL_ANGLES = (67.5, 22.5, 45.0, 0.0)


def _ket(theta_deg):
    t = np.deg2rad(theta_deg)
    # basis (H, V); H passes with amplitude sin(theta)
    return np.array([np.sin(t), np.cos(t)])


def polarizer_operator(theta_deg, eps_par=1.0, eps_perp=0.0):
    if theta_deg is None:
        return np.eye(2)
    k = _ket(theta_deg)
    kp = np.array([k[1], -k[0]])
    return eps_par * np.outer(k, k) + eps_perp * np.outer(kp, kp)


def oracle_state(f):
    psi = np.array([1.0, 0.0, 0.0, complex(f)], dtype=complex)
    return psi / np.linalg.norm(psi)


def oracle_coincidence(f, th1, th2, pol1=(1.0, 0.0), pol2=(1.0, 0.0)):
    """<psi| M1 (x) M2 |psi> built from 4x4 matrices."""
    psi = oracle_state(f)
    op = np.kron(polarizer_operator(th1, *pol1), polarizer_operator(th2, *pol2))
    return float(np.real(np.conj(psi) @ op @ psi))


def oracle_ch(f, angles, pol1=(1.0, 0.0), pol2=(1.0, 0.0)):
    a, ap, b, bp = angles
    p = lambda x, y: oracle_coincidence(f, x, y, pol1, pol2)
    num = p(a, b) - p(a, bp) + p(ap, b) + p(ap, bp)
    den = p(ap, None) + p(None, b)
    return num - den, num / den


@pytest.fixture(params=["numpy", "numba"])
def backend(request, monkeypatch):
    """Run a test under each kernel implementation that is available."""
    from chbell import _kernels

    impls = _kernels.implementations()
    if request.param not in impls:
        pytest.skip(f"{request.param} backend unavailable")
    ch, ratio, match = impls[request.param]
    monkeypatch.setattr(_kernels, "best_ch", ch)
    monkeypatch.setattr(_kernels, "best_ratio", ratio)
    monkeypatch.setattr(_kernels, "match_heads", match)
    return request.param
