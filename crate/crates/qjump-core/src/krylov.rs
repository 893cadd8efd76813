//! Arnoldi (Krylov) approximation of `exp(t A) v` with adaptive substepping,
//! plus a dense scaling-and-squaring matrix exponential for small matrices.
//!
//! Used for propagating vectorised density matrices under no-click and
//! Lindblad generators, where the dimension rules out both dense
//! exponentials and spectral decompositions.

use ndarray::Array2;
use ndarray_linalg::Inverse;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Action of a linear generator on a flat complex vector.
pub trait LinearOp {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[C64], y: &mut [C64]);
}

/// Dense matrix exponential via Pade-13 scaling and squaring.
pub fn expm_dense(a: &Array2<C64>) -> Result<Array2<C64>> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA_13: f64 = 5.371920351148152;

    let n = a.nrows();
    assert_eq!(n, a.ncols());
    // 1-norm
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let s = if norm1 > THETA_13 {
        (norm1 / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let a = a.mapv(|v| v / 2f64.powi(s as i32));

    let eye = Array2::<C64>::eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);

    let u_inner = &a6 * C64::new(B[13], 0.0) + &a4 * C64::new(B[11], 0.0) + &a2 * C64::new(B[9], 0.0);
    let u = a.dot(
        &(a6.dot(&u_inner)
            + &a6 * C64::new(B[7], 0.0)
            + &a4 * C64::new(B[5], 0.0)
            + &a2 * C64::new(B[3], 0.0)
            + &eye * C64::new(B[1], 0.0)),
    );
    let v_inner = &a6 * C64::new(B[12], 0.0) + &a4 * C64::new(B[10], 0.0) + &a2 * C64::new(B[8], 0.0);
    let v = a6.dot(&v_inner)
        + &a6 * C64::new(B[6], 0.0)
        + &a4 * C64::new(B[4], 0.0)
        + &a2 * C64::new(B[2], 0.0)
        + &eye * C64::new(B[0], 0.0);

    let num = &v + &u;
    let den = &v - &u;
    let den_inv = den
        .inv()
        .map_err(|e| Error::Integration(format!("expm Pade solve failed: {e}")))?;
    let mut r = den_inv.dot(&num);
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

/// Compute `exp(t A) v` to relative tolerance `tol` (relative to the norm at
/// each substep start) with Krylov dimension up to `m`.
pub fn expm_multiply(op: &dyn LinearOp, v: &[C64], t: f64, tol: f64, m: usize) -> Result<Vec<C64>> {
    let n = op.dim();
    assert_eq!(v.len(), n);
    if t == 0.0 {
        return Ok(v.to_vec());
    }
    let m = m.min(n.max(2));
    let mut w = v.to_vec();
    let mut t_done = 0.0f64;
    let mut tau = t; // first segment attempts the full span; the error
                     // estimate shrinks it as needed
    let mut n_seg = 0usize;

    while t_done < t {
        n_seg += 1;
        if n_seg > 2_000_000 {
            return Err(Error::Integration("Krylov segment budget exhausted".into()));
        }
        let beta = norm(&w);
        if beta == 0.0 {
            return Ok(w);
        }
        // Arnoldi factorisation A V_m = V_m H_m + h_{m+1,m} v_{m+1} e_m^T
        let mut vs: Vec<Vec<C64>> = Vec::with_capacity(m + 1);
        vs.push(w.iter().map(|x| x / beta).collect());
        let mut h = Array2::<C64>::zeros((m + 2, m + 2));
        let mut breakdown = None;
        let mut av_next = vec![C64::new(0.0, 0.0); n];
        for j in 0..m {
            let mut u = vec![C64::new(0.0, 0.0); n];
            op.apply(&vs[j], &mut u);
            // modified Gram-Schmidt with one reorthogonalisation pass
            for pass in 0..2 {
                for (i, vi) in vs.iter().enumerate() {
                    let hij = dot(vi, &u);
                    if pass == 0 {
                        h[(i, j)] = hij;
                    } else {
                        h[(i, j)] += hij;
                    }
                    axpy(-hij, vi, &mut u);
                }
            }
            let hnext = norm(&u);
            if hnext < 1e-14 * beta.max(1.0) {
                breakdown = Some(j + 1);
                break;
            }
            h[(j + 1, j)] = C64::new(hnext, 0.0);
            vs.push(u.iter().map(|x| x / hnext).collect());
        }
        let k = breakdown.unwrap_or(m);

        if let Some(k) = breakdown {
            // invariant subspace: the small exponential is exact
            let tau_full = t - t_done;
            let hk = h.slice(ndarray::s![0..k, 0..k]).to_owned();
            let f = expm_dense(&hk.mapv(|x| x * tau_full))?;
            w = combine(&vs[..k], &f, beta);
            return Ok(w);
        }

        // augmented Hessenberg: entry (m,0) of its exponential carries the
        // first neglected term, (m+1,0) the second
        let mut h_aug = h.clone();
        h_aug[(m + 1, m)] = C64::new(1.0, 0.0);
        op.apply(&vs[m], &mut av_next);
        let av_norm = norm(&av_next);

        loop {
            let f = expm_dense(&h_aug.mapv(|x| x * tau))?;
            let err1 = beta * f[(m, 0)].norm();
            let err2 = beta * f[(m + 1, 0)].norm() * av_norm;
            let err_loc = if err1 > 10.0 * err2 {
                err2
            } else if err1 > err2 {
                err1 * err2 / (err1 - err2)
            } else {
                err1
            };
            let tol_step = tol * beta * (tau / t).max(1e-16);
            if err_loc <= tol_step || tau <= t * 1e-14 {
                // include the phi1-corrected (m+1)-th term
                w = combine(&vs[..k + 1], &f, beta);
                t_done += tau;
                let grow = if err_loc > 0.0 {
                    (0.9 * tol_step / err_loc).powf(1.0 / m as f64)
                } else {
                    2.0
                };
                tau = (tau * grow.clamp(0.2, 2.0)).min(t - t_done);
                break;
            }
            let shrink = (0.9 * tol_step / err_loc).powf(1.0 / m as f64);
            tau *= shrink.clamp(0.1, 0.9);
        }
    }
    Ok(w)
}

fn combine(vs: &[Vec<C64>], f: &Array2<C64>, beta: f64) -> Vec<C64> {
    let n = vs[0].len();
    let mut w = vec![C64::new(0.0, 0.0); n];
    for (j, vj) in vs.iter().enumerate() {
        let c = f[(j, 0)] * beta;
        if c.norm() > 0.0 {
            axpy(c, vj, &mut w);
        }
    }
    w
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn axpy(c: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
