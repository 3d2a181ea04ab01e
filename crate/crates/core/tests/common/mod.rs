#![allow(dead_code)]

use mpcc_core::{AffineInstance, BranchAssignment, MultiplierVector};
use rand::Rng;

pub fn uniform_vec<R: Rng>(rng: &mut R, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(lo..hi)).collect()
}

pub fn uniform_mat<R: Rng>(rng: &mut R, rows: usize, cols: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..rows).map(|_| uniform_vec(rng, cols, lo, hi)).collect()
}

/// How the objective gradient at the origin is chosen.
#[derive(Clone, Copy, Debug)]
pub enum Objective {
    Random,
    /// `-grad f` built from multipliers with nonnegative biactive signs.
    StrongMultiplier,
    /// `-grad f` built from multipliers with one zero sign per biactive pair.
    MZeroMultiplier,
}

/// Affine instance for which the origin is feasible and at least one
/// complementarity pair is biactive.
pub fn random_affine<R: Rng>(
    rng: &mut R,
    n_max: usize,
    l_max: usize,
    m_max: usize,
    p_max: usize,
    objective: Objective,
) -> AffineInstance {
    let n = rng.gen_range(1..=n_max);
    let l = rng.gen_range(0..=l_max);
    let m = rng.gen_range(0..=m_max.min(n.saturating_sub(1)));
    let p = rng.gen_range(1..=p_max);

    let mut inst = AffineInstance::linear(vec![0.0; n]);
    inst.a_g = uniform_mat(rng, l, n, -2.0, 2.0);
    inst.b_g = (0..l)
        .map(|_| if rng.gen_bool(0.5) { 0.0 } else { -rng.gen_range(0.5..2.0) })
        .collect();
    inst.a_h = uniform_mat(rng, m, n, -2.0, 2.0);
    inst.b_h = vec![0.0; m];
    inst.a_comp_g = uniform_mat(rng, p, n, -2.0, 2.0);
    inst.a_comp_h = uniform_mat(rng, p, n, -2.0, 2.0);
    inst.b_comp_g = vec![0.0; p];
    inst.b_comp_h = vec![0.0; p];
    // kind 0: biactive, 1: G > 0, 2: H > 0; index 0 is always biactive.
    let kinds: Vec<u8> = (0..p).map(|i| if i == 0 { 0 } else { rng.gen_range(0..3) }).collect();
    for (i, &k) in kinds.iter().enumerate() {
        match k {
            1 => inst.b_comp_g[i] = rng.gen_range(0.5..2.0),
            2 => inst.b_comp_h[i] = rng.gen_range(0.5..2.0),
            _ => {}
        }
    }

    inst.c = match objective {
        Objective::Random => uniform_vec(rng, n, -3.0, 3.0),
        Objective::StrongMultiplier | Objective::MZeroMultiplier => {
            let mut mult = MultiplierVector::zeros(l, m, p);
            for i in 0..l {
                if inst.b_g[i] == 0.0 {
                    mult.lambda[i] = rng.gen_range(0.0..2.0);
                }
            }
            for e in mult.eta.iter_mut() {
                *e = rng.gen_range(-2.0..2.0);
            }
            for (i, &k) in kinds.iter().enumerate() {
                match k {
                    1 => mult.nu[i] = rng.gen_range(-2.0..2.0),
                    2 => mult.mu[i] = rng.gen_range(-2.0..2.0),
                    _ => {
                        if matches!(objective, Objective::StrongMultiplier) {
                            mult.mu[i] = rng.gen_range(0.0..2.0);
                            mult.nu[i] = rng.gen_range(0.0..2.0);
                        } else if rng.gen_bool(0.5) {
                            mult.nu[i] = rng.gen_range(-2.0..2.0);
                        } else {
                            mult.mu[i] = rng.gen_range(-2.0..2.0);
                        }
                    }
                }
            }
            minus_gradient_combination(&inst, &mult)
        }
    };
    inst
}

/// `grad f` such that the given multipliers satisfy the gradient identity.
pub fn minus_gradient_combination(inst: &AffineInstance, mult: &MultiplierVector) -> Vec<f64> {
    let n = inst.n();
    let mut w = vec![0.0; n];
    let mut add = |rows: &[Vec<f64>], coefs: &[f64], sign: f64| {
        for (row, c) in rows.iter().zip(coefs) {
            for (wj, rj) in w.iter_mut().zip(row) {
                *wj += sign * c * rj;
            }
        }
    };
    add(&inst.a_g, &mult.lambda, 1.0);
    add(&inst.a_h, &mult.eta, 1.0);
    add(&inst.a_comp_g, &mult.mu, -1.0);
    add(&inst.a_comp_h, &mult.nu, -1.0);
    w.into_iter().map(|v| -v).collect()
}

/// One `(mu, nu)` point per assignment over all `p` indices, drawn uniformly
/// in `[-5, 5]` with the enforced coordinate clamped nonnegative.
pub fn lemma_points<R: Rng>(r: &mut R, p: usize) -> Vec<(MultiplierVector, BranchAssignment)> {
    let all: Vec<usize> = (0..p).collect();
    BranchAssignment::enumerate(p, &all)
        .into_iter()
        .map(|alpha| {
            let mut mv = MultiplierVector::zeros(0, 0, p);
            for i in 0..p {
                mv.mu[i] = r.gen_range(-5.0..5.0);
                mv.nu[i] = r.gen_range(-5.0..5.0);
                if alpha.choice(i) == 1 {
                    mv.mu[i] = mv.mu[i].max(0.0);
                } else {
                    mv.nu[i] = mv.nu[i].max(0.0);
                }
            }
            (mv, alpha)
        })
        .collect()
}
