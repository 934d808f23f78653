"""q-integers, q-binomials and the Jackson integral, side by side with q = 1."""

import math

from mkzlab import q_beta, q_binomial, q_factorial, q_integer, q_integral, q_pochhammer

print("[n]_q approaches n as q -> 1")
for q in (0.5, 0.9, 0.99, 1.0):
    print(f"  q={q:<5} [5]_q={q_integer(5, q):.6f}  [5]_q!={q_factorial(5, q):.4f}")

print("\nGaussian binomial [6 choose 3]_q is a polynomial in q with 20 = C(6,3) at q = 1")
for q in (0.0, 0.5, 1.0):
    print(f"  q={q}: {q_binomial(6, 3, q):.6f}")
print("  (0.5; 0.5)_4 =", q_pochhammer(0.5, 0.5, 4))

# the Jackson integral of t on [0, 1] is 1/[2]_q, not 1/2
for q in (0.3, 0.7, 0.95):
    r = q_integral(lambda t: t, 1.0, q)
    print(f"\nJackson integral of t, q={q}: {r.value:.12f} vs 1/[2]_q={1 / q_integer(2, q):.12f}"
          f"  ({r.terms_used} nodes, tail <= {r.tail_bound:.1e})")

print("\nq-Beta B_q(2, 3) against [1]![2]!/[4]!")
for q in (0.5, 0.9):
    r = q_beta(2, 3, q)
    closed = q_factorial(1, q) * q_factorial(2, q) / q_factorial(4, q)
    print(f"  q={q}: {r.value:.12f}  closed form {closed:.12f}")
print("  q -> 1 limit 1/12 =", 1 / 12, " classical Beta:", math.gamma(2) * math.gamma(3) / math.gamma(5))
