"""Two q-sequences that break the classical conditions yet are Abel-null where it matters."""

from mkzlab import abel_profile, classical_conditions_check, density_estimate, gen_cube_qseq, gen_prime_qseq
from mkzlab.summability import durrmeyer_ratio, inv_bracket, is_perfect_cube, is_prime

ys = [0.9, 0.99, 0.999, 0.9999]
cube, prime = gen_cube_qseq(), gen_prime_qseq()

print("q_n = 0 on perfect cubes, 1 elsewhere")
print("  first terms:", [cube(n) for n in range(1, 30)])
print("  density of cubes up to 10^6:", density_estimate(is_perfect_cube, 10**6).density)
print("  classical check:", classical_conditions_check(cube, 1000).verdict)
prof = abel_profile(inv_bracket(cube), ys, start_index=3)
print("  Abel means of 1/[n-1]_{q_n}:", [f"{v:.5f}" for v in prof.values])

print("\nq_n = 0 on primes, 1 elsewhere")
print("  density of primes up to 10^5:", density_estimate(is_prime, 10**5).density)
print("  classical check:", classical_conditions_check(prime, 1000).verdict)
prof = abel_profile(durrmeyer_ratio(prime), ys, start_index=2)
print("  Abel means of [2]/[n-1]:", [f"{v:.5f}" for v in prof.values])

# the q_n = 0 terms each contribute 1 forever; only thinning them out saves the mean
print("\nBoth profiles shrink as y -> 1, even though q_n = 0 infinitely often.")
