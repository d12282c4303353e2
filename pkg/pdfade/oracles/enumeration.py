import numpy as np

from pdfade.errors import ConstraintError, DomainError

MAX_PACKETS = 20


def oracle_q_exhaustive(n, m_hat, p_e):
    """
    Message-error probability by brute force: walk all 2^n erasure patterns
    of n packets and add up the probability of those with fewer than m_hat
    decoded packets.

    Args:
        n: packets sent, at most 20
        m_hat: packets needed
        p_e: per-packet erasure probability

    Returns:
        float
    """
    if int(n) != n or n < 1 or n > MAX_PACKETS:
        raise DomainError(f"exhaustive enumeration handles 1 <= n <= {MAX_PACKETS}, got {n}")
    if int(m_hat) != m_hat or m_hat < 1 or m_hat > n:
        raise ConstraintError(f"need 1 <= m_hat <= n, got m_hat={m_hat}, n={n}")
    if not 0.0 <= p_e <= 1.0:
        raise DomainError(f"p_e must lie in [0, 1], got {p_e}")
    n, m_hat = int(n), int(m_hat)

    patterns = np.arange(2 ** n, dtype=np.int64)
    decoded = np.zeros(patterns.size, dtype=np.int64)
    for bit in range(n):
        decoded += (patterns >> bit) & 1

    prob = np.power(1.0 - p_e, decoded) * np.power(p_e, n - decoded)
    return float(prob[decoded < m_hat].sum())
