//! The statement each check tests, in words.

pub const QUARTER: &str = "transitive P, speeds (1,1,0): Pr[M_good < M_bad] >= 1/4";
pub const SPEED_BOUND: &str =
    "transitive P, lambda_x = 1, lambda_y <= 1: Pr[M_good < M_bad] >= (1/4752) / (sqrt(1+lz) + sqrt(ly+lz))^2";
pub const LINEAR_BOUND: &str = "transitive P: Pr[M_good < M_bad] >= (1/4)(1 - 2 lz / (1 + ly)) when positive";
pub const IDENTITY: &str =
    "transitive reversible P: tau_z / (ly + lz) from x has the law of the Y-Z meeting time from (x, z)";
pub const IDENTITY_FAILS: &str = "without transitivity the hitting/meeting identity can fail (gap > 1e-3)";
pub const REVERSIBLE_FAMILY: &str = "single-chain hitting facts need a reversible P";
pub const SYMMETRY: &str = "transitive reversible P: E_x tau_y = E_y tau_x";
pub const THIT_TWICE: &str = "reversible P: t_hit <= 2 t*_hit";
pub const SINGLE_DRIFT: &str = "f(X_t, z) + t is a martingale before tau_z, with f(x, z) = E_x tau_z";
pub const PAIR_DRIFT: &str = "transitive P: f(X_t, Y_t) + 2t is a martingale before X and Y meet";
pub const RESIDUAL_MONOTONE: &str = "reversible P: s -> E_pi[tau_z - s | tau_z > s] is nondecreasing";
pub const RESIDUAL_CEILING: &str = "reversible P: E_pi[tau_z - s | tau_z > s] <= E_pi[tau_z] + t_rel";
pub const NEGATIVE_SET: &str =
    "reversible P: the set where a second eigenfunction is <= 0 has mass >= 1/2 and P_x(tau_A > t) >= exp(-t/t_rel)";
pub const SMALL_TIME: &str = "transitive reversible P: averaged P_x(tau_z <= theta t_hit) over A_x is <= 6 sqrt(theta)";
pub const SMALL_TIME_MEETING: &str =
    "transitive reversible P: averaged meeting probability by theta t_hit is <= 6 sqrt((la + lb) theta)";
pub const SHARPNESS: &str = "geometric-rate hypercube, speeds (1,1,0): Pr[M_good <= M_bad] <= 1/3 + 2 d eps";
pub const LEVEL: &str = "geometric-rate hypercube: P[tau_k < sigma_{k+1}] >= (1 - eps)^k";
pub const TRAP_DOWN: &str = "trap graph: pi(Down) <= 2/C";
pub const TRAP_TREND: &str = "trap graph, speeds (1,0,1): Pr[M_good <= M_bad] decreases in n without a positive floor";
pub const DIRECTED_TREND: &str =
    "directed cycle, speeds (1,1,0): Pr[M_good < M_bad] decreases in n, so reversibility is needed";
pub const NOT_REVERSIBLE: &str = "the directed cycle is not reversible";
pub const EXACT_AGREES: &str = "Monte Carlo estimate agrees with the exact absorbing solve within 3.5 SE";
pub const ORACLE_RATE: &str = "at least 95% of Monte Carlo cells agree with the exact solve within 3.5 SE";
pub const OCCUPATION: &str =
    "transitive P, good-first start: diagonal occupation up to tau equals E[tau] / n^2 at every state";
pub const T_INTEGRAL: &str = "transitive reversible P: int P_mu(X_t = Y_t, t < M_bad) dt <= 22 t*_hit / n";
pub const MOVING_TARGET: &str = "reversible P, any fixed trajectory h: E_x tau_h <= 11 t*_hit";
pub const FROZEN_TARGET: &str = "a frozen target reduces to the hitting time E_x tau_z";
