//! RBF-kernel support vector machines trained with sequential minimal
//! optimization.
//!
//! Both the C-classifier and the epsilon-regressor reduce to the same dual
//!
//! ```text
//! min_a  a'Qa/2 + p'a   s.t.  y'a = const,  0 <= a_t <= C
//! ```
//!
//! solved with second-order working-set selection. The regressor uses two
//! dual variables per training point that share one kernel row cache.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::matrix::NumericMatrix;

const TAU: f64 = 1e-12;
const CACHE_BYTES: usize = 200 * 1024 * 1024;

/// `1 / (n_features * Var(X))`, falling back to 1 for constant input.
pub fn auto_gamma(x: &NumericMatrix) -> f64 {
    let var = x.total_variance();
    if x.cols() == 0 || var <= 0.0 {
        1.0
    } else {
        1.0 / (x.cols() as f64 * var)
    }
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

fn rbf(gamma: f64, a: &[f64], a_sq: f64, b: &[f64], b_sq: f64) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(p, q)| p * q).sum();
    (-gamma * (a_sq + b_sq - 2.0 * dot).max(0.0)).exp()
}

/// Kernel rows over the training points with least-recently-used eviction.
struct KernelCache<'a> {
    x: &'a NumericMatrix,
    sq: Vec<f64>,
    gamma: f64,
    rows: HashMap<usize, (u64, Vec<f64>)>,
    capacity: usize,
    tick: u64,
}

impl<'a> KernelCache<'a> {
    fn new(x: &'a NumericMatrix, gamma: f64) -> Self {
        let n = x.rows().max(1);
        let capacity = (CACHE_BYTES / (n * std::mem::size_of::<f64>())).max(2);
        KernelCache {
            x,
            sq: x.row_iter().map(sq_norm).collect(),
            gamma,
            rows: HashMap::new(),
            capacity,
            tick: 0,
        }
    }

    /// Makes row `i` resident without evicting `keep`.
    fn ensure(&mut self, i: usize, keep: Option<usize>) {
        self.tick += 1;
        if let Some(entry) = self.rows.get_mut(&i) {
            entry.0 = self.tick;
            return;
        }
        if self.rows.len() >= self.capacity {
            let victim = self
                .rows
                .iter()
                .filter(|(k, _)| Some(**k) != keep)
                .min_by_key(|(_, (t, _))| *t)
                .map(|(k, _)| *k);
            if let Some(v) = victim {
                self.rows.remove(&v);
            }
        }
        let xi = self.x.row(i);
        let si = self.sq[i];
        let row: Vec<f64> = (0..self.x.rows())
            .map(|t| rbf(self.gamma, xi, si, self.x.row(t), self.sq[t]))
            .collect();
        self.rows.insert(i, (self.tick, row));
    }

    fn get(&self, i: usize) -> &[f64] {
        &self.rows[&i].1
    }
}

struct Problem<'a> {
    kernel: KernelCache<'a>,
    /// +1 / -1 per dual variable
    sign: Vec<f64>,
    /// training point behind each dual variable
    point: Vec<usize>,
    p: Vec<f64>,
    c: f64,
    tol: f64,
}

pub(crate) struct DualSolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
}

impl Problem<'_> {
    fn q(&self, row: &[f64], i: usize, t: usize) -> f64 {
        self.sign[i] * self.sign[t] * row[self.point[t]]
    }

    fn solve(mut self) -> DualSolution {
        let len = self.sign.len();
        let c = self.c;
        let mut alpha = vec![0.0; len];
        let mut grad = self.p.clone();
        let max_iter = (100 * len).max(10_000_000);
        let mut iterations = 0;

        // RBF diagonal is 1, so every Q_tt is 1.
        let qd = 1.0;

        while iterations < max_iter {
            // working set selection, first index
            let mut gmax = f64::NEG_INFINITY;
            let mut i_sel = None;
            for t in 0..len {
                if self.sign[t] > 0.0 {
                    if alpha[t] < c && -grad[t] >= gmax {
                        gmax = -grad[t];
                        i_sel = Some(t);
                    }
                } else if alpha[t] > 0.0 && grad[t] >= gmax {
                    gmax = grad[t];
                    i_sel = Some(t);
                }
            }
            let Some(i) = i_sel else { break };
            self.kernel.ensure(self.point[i], None);

            // second index by maximal objective decrease
            let mut gmax2 = f64::NEG_INFINITY;
            let mut j_sel = None;
            let mut obj_min = f64::INFINITY;
            {
                let ki = self.kernel.get(self.point[i]);
                for t in 0..len {
                    if self.sign[t] > 0.0 {
                        if alpha[t] > 0.0 {
                            let diff = gmax + grad[t];
                            if grad[t] >= gmax2 {
                                gmax2 = grad[t];
                            }
                            if diff > 0.0 {
                                let quad = qd + qd - 2.0 * self.sign[i] * self.q(ki, i, t);
                                let obj = -(diff * diff) / if quad > 0.0 { quad } else { TAU };
                                if obj <= obj_min {
                                    j_sel = Some(t);
                                    obj_min = obj;
                                }
                            }
                        }
                    } else if alpha[t] < c {
                        let diff = gmax - grad[t];
                        if -grad[t] >= gmax2 {
                            gmax2 = -grad[t];
                        }
                        if diff > 0.0 {
                            let quad = qd + qd + 2.0 * self.sign[i] * self.q(ki, i, t);
                            let obj = -(diff * diff) / if quad > 0.0 { quad } else { TAU };
                            if obj <= obj_min {
                                j_sel = Some(t);
                                obj_min = obj;
                            }
                        }
                    }
                }
            }
            let j = match j_sel {
                Some(j) if gmax + gmax2 >= self.tol => j,
                _ => break,
            };
            iterations += 1;

            self.kernel.ensure(self.point[j], Some(self.point[i]));
            let ki = self.kernel.get(self.point[i]);
            let kj = self.kernel.get(self.point[j]);
            let qij = self.q(ki, i, j);

            let (old_i, old_j) = (alpha[i], alpha[j]);
            if self.sign[i] != self.sign[j] {
                let quad = (qd + qd + 2.0 * qij).max(TAU);
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = alpha[i] - alpha[j];
                alpha[i] += delta;
                alpha[j] += delta;
                if diff > 0.0 {
                    if alpha[j] < 0.0 {
                        alpha[j] = 0.0;
                        alpha[i] = diff;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if diff > 0.0 {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = c - diff;
                    }
                } else if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            } else {
                let quad = (qd + qd - 2.0 * qij).max(TAU);
                let delta = (grad[i] - grad[j]) / quad;
                let sum = alpha[i] + alpha[j];
                alpha[i] -= delta;
                alpha[j] += delta;
                if sum > c {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = sum - c;
                    }
                } else if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if sum > c {
                    if alpha[j] > c {
                        alpha[j] = c;
                        alpha[i] = sum - c;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }

            let di = alpha[i] - old_i;
            let dj = alpha[j] - old_j;
            let (si, sj) = (self.sign[i] * di, self.sign[j] * dj);
            for t in 0..len {
                let pt = self.point[t];
                grad[t] += self.sign[t] * (si * ki[pt] + sj * kj[pt]);
            }
        }

        if iterations >= max_iter {
            log::warn!("SMO reached the iteration cap ({max_iter}) before converging");
        }

        let rho = self.offset(&alpha, &grad);
        DualSolution {
            alpha,
            rho,
            iterations,
        }
    }

    fn offset(&self, alpha: &[f64], grad: &[f64]) -> f64 {
        let c = self.c;
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut sum_free, mut n_free) = (0.0, 0usize);
        for t in 0..alpha.len() {
            let yg = self.sign[t] * grad[t];
            let up = self.sign[t] > 0.0;
            if alpha[t] >= c {
                if up {
                    lb = lb.max(yg);
                } else {
                    ub = ub.min(yg);
                }
            } else if alpha[t] <= 0.0 {
                if up {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                n_free += 1;
                sum_free += yg;
            }
        }
        if n_free > 0 {
            sum_free / n_free as f64
        } else {
            (ub + lb) / 2.0
        }
    }
}

/// `f(x) = sum_k coef_k K(sv_k, x) - rho`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelExpansion {
    pub gamma: f64,
    pub rho: f64,
    pub support: Vec<Vec<f64>>,
    pub coef: Vec<f64>,
}

impl KernelExpansion {
    fn from_dual(x: &NumericMatrix, gamma: f64, coef_per_point: Vec<f64>, rho: f64) -> Self {
        let mut support = Vec::new();
        let mut coef = Vec::new();
        for (i, c) in coef_per_point.into_iter().enumerate() {
            if c != 0.0 {
                support.push(x.row(i).to_vec());
                coef.push(c);
            }
        }
        KernelExpansion {
            gamma,
            rho,
            support,
            coef,
        }
    }

    pub fn decision(&self, row: &[f64]) -> f64 {
        let row_sq = sq_norm(row);
        let mut sum = 0.0;
        for (sv, c) in self.support.iter().zip(&self.coef) {
            sum += c * rbf(self.gamma, sv, sq_norm(sv), row, row_sq);
        }
        sum - self.rho
    }

    pub fn decision_all(&self, x: &NumericMatrix) -> Vec<f64> {
        let sv_sq: Vec<f64> = self.support.iter().map(|s| sq_norm(s)).collect();
        (0..x.rows())
            .into_par_iter()
            .map(|i| {
                let row = x.row(i);
                let row_sq = sq_norm(row);
                let mut sum = 0.0;
                for ((sv, s), c) in self.support.iter().zip(&sv_sq).zip(&self.coef) {
                    sum += c * rbf(self.gamma, sv, *s, row, row_sq);
                }
                sum - self.rho
            })
            .collect()
    }
}

/// C-support vector classification with labels `true` = +1.
pub fn fit_svc(x: &NumericMatrix, y: &[bool], c: f64, gamma: f64, tol: f64) -> KernelExpansion {
    let l = x.rows();
    let sign: Vec<f64> = y.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect();
    let problem = Problem {
        kernel: KernelCache::new(x, gamma),
        sign: sign.clone(),
        point: (0..l).collect(),
        p: vec![-1.0; l],
        c,
        tol,
    };
    let sol = problem.solve();
    log::debug!("svc converged after {} iterations", sol.iterations);
    let coef = sol.alpha.iter().zip(&sign).map(|(a, s)| a * s).collect();
    KernelExpansion::from_dual(x, gamma, coef, sol.rho)
}

/// Epsilon-insensitive support vector regression.
pub fn fit_svr(
    x: &NumericMatrix,
    z: &[f64],
    c: f64,
    gamma: f64,
    epsilon: f64,
    tol: f64,
) -> KernelExpansion {
    let l = x.rows();
    let mut sign = vec![1.0; 2 * l];
    sign[l..].iter_mut().for_each(|s| *s = -1.0);
    let mut p = Vec::with_capacity(2 * l);
    p.extend(z.iter().map(|v| epsilon - v));
    p.extend(z.iter().map(|v| epsilon + v));
    let problem = Problem {
        kernel: KernelCache::new(x, gamma),
        sign,
        point: (0..2 * l).map(|t| t % l).collect(),
        p,
        c,
        tol,
    };
    let sol = problem.solve();
    log::debug!("svr converged after {} iterations", sol.iterations);
    let coef = (0..l).map(|i| sol.alpha[i] - sol.alpha[i + l]).collect();
    KernelExpansion::from_dual(x, gamma, coef, sol.rho)
}
