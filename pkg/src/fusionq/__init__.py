"""Type-A fusion categories at roots of unity, in explicit matrix form.

Construction of the truncated tensor powers p_n V^{(x)n} of the vector
representation of U_q(sl_N) at q = exp(i pi/ell), the dual weak
quasi-Hopf C*-groupoid built on them, a Haar functional with its
cosemisimplicity certificate, and numerical verification suites for the
identities the theory asserts.
"""

from .scalars import QContext, QExponent, q_fact, q_int, q_power

__all__ = ["QContext", "QExponent", "q_power", "q_int", "q_fact"]

__version__ = "0.1.0"
