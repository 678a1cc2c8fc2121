//! Reference computations that share no code with the library.

#![allow(dead_code)]

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations, descending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.partial_cmp(x).unwrap());
    ev
}

fn binomial(k: usize, m: usize) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * (k - i) as f64 / (i + 1) as f64)
}

/// `<psi| E_a |psi>` for an orthonormal real basis of Hermitian `n x n`
/// matrices: diagonal units, then `(E_jk + E_kj)/sqrt2` and `i(E_jk - E_kj)/sqrt2`.
fn expectations(re: &[f64], im: &[f64]) -> Vec<f64> {
    let n = re.len();
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        out.push(re[j] * re[j] + im[j] * im[j]);
    }
    let r2 = std::f64::consts::SQRT_2;
    for j in 0..n {
        for k in (j + 1)..n {
            // conj(psi_j) psi_k
            let pr = re[j] * re[k] + im[j] * im[k];
            let pi = re[j] * im[k] - im[j] * re[k];
            out.push(r2 * pr);
            out.push(-r2 * pi);
        }
    }
    out
}

/// Eigenvalues of the coherent-state channel at level `k`, integrating
/// `n |E_a><E_b|`-moments over the sphere with composite Simpson in theta
/// and the trapezoid rule in phi. Vectors come from the stereographic
/// coordinate `z = tan(theta/2) e^{i phi}`.
pub fn coherent_channel_spectrum(k: usize, theta_intervals: usize, nphi: usize) -> Vec<f64> {
    let n = k + 1;
    let dim = n * n;
    let mut m = vec![vec![0.0; dim]; dim];
    let h = std::f64::consts::PI / theta_intervals as f64;
    for it in 1..theta_intervals {
        let theta = it as f64 * h;
        let simpson = if it % 2 == 1 { 4.0 } else { 2.0 };
        let w_theta = simpson * h / 3.0 * theta.sin() / 2.0;
        for ip in 0..nphi {
            let phi = 2.0 * std::f64::consts::PI * ip as f64 / nphi as f64;
            let w = w_theta / nphi as f64;
            let r = (theta / 2.0).tan();
            let norm = (1.0 + r * r).powf(k as f64 / 2.0);
            let mut re = vec![0.0; n];
            let mut im = vec![0.0; n];
            for j in 0..n {
                let amp = binomial(k, j).sqrt() * r.powi(j as i32) / norm;
                re[j] = amp * (j as f64 * phi).cos();
                im[j] = amp * (j as f64 * phi).sin();
            }
            let e = expectations(&re, &im);
            for a in 0..dim {
                for b in 0..dim {
                    m[a][b] += n as f64 * w * e[a] * e[b];
                }
            }
        }
    }
    jacobi_eigenvalues(m)
}

/// Minimum of `sum c_ij x_ij` over the vertices of the transportation
/// polytope, found by solving every square subsystem of the marginal
/// constraints.
pub fn transport_by_vertices(a: &[f64], b: &[f64], cost: &[Vec<f64>]) -> f64 {
    let (m, n) = (a.len(), b.len());
    let cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let rank = m + n - 1;
    let mut best = f64::INFINITY;
    for subset in combinations(cells.len(), rank) {
        // Equations: rows 0..m, columns 0..n-1 (the last column is implied).
        let mut sys = vec![vec![0.0; rank + 1]; rank];
        for (var, &c) in subset.iter().enumerate() {
            let (i, j) = cells[c];
            sys[i][var] = 1.0;
            if j < n - 1 {
                sys[m + j][var] = 1.0;
            }
        }
        for i in 0..m {
            sys[i][rank] = a[i];
        }
        for j in 0..n - 1 {
            sys[m + j][rank] = b[j];
        }
        let Some(x) = solve(sys) else { continue };
        if x.iter().any(|v| *v < -1e-12) {
            continue;
        }
        let cost: f64 = subset.iter().zip(&x).map(|(&c, v)| cost[cells[c].0][cells[c].1] * v).sum();
        best = best.min(cost);
    }
    best
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    rec(0, n, r, &mut cur, &mut out);
    out
}

/// Gaussian elimination with partial pivoting on an augmented square system.
fn solve(mut s: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = s.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| s[x][col].abs().partial_cmp(&s[y][col].abs()).unwrap())?;
        if s[piv][col].abs() < 1e-12 {
            return None;
        }
        s.swap(col, piv);
        for row in 0..n {
            if row != col {
                let f = s[row][col] / s[col][col];
                for c in col..=n {
                    s[row][c] -= f * s[col][c];
                }
            }
        }
    }
    Some((0..n).map(|i| s[i][n] / s[i][i]).collect())
}
