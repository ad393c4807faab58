"""Closed forms for the built-in examples with q = 0 (k = √λ, λ > 0)."""
import math


def dirichlet_omega(lam):
    k = math.sqrt(lam)
    return math.sin(k * math.pi) / k


def dirichlet_green(x, y, lam):
    k = math.sqrt(lam)
    lo, hi = min(x, y), max(x, y)
    return math.sin(k * lo) * math.sin(k * (hi - math.pi)) / math.sin(k * math.pi) / k


def halving_omega(lam):
    """ω of example P: φ- and ψ+ in closed form, continued to c = 0 with the halving jump."""
    k = math.sqrt(lam)
    phi0 = -lam * math.cos(k) + math.sin(k) / k
    phip0 = lam * k * math.sin(k) + math.cos(k)
    psi0 = -math.cos(k) - k * math.sin(k)
    psip0 = -k * math.sin(k) + lam * math.cos(k)
    return phi0 * psip0 - 0.5 * phip0 * psi0


def sine_coefficient(n):
    """H-coefficient of x(π - x) on the normalised Dirichlet eigenfunction √(2/π) sin(nx)."""
    return math.sqrt(2 / math.pi) * 4 / n ** 3 if n % 2 else 0.0
