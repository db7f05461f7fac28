use super::SddMatrix;

/// Approximate energy-minimizing extension from `C` to all vertices, computed by
/// `T` rounds of weighted neighbour averaging on `F` (excess diagonal acts as an
/// edge to a vertex held at 0).
#[derive(Debug, Clone)]
pub struct VoltageExtension {
    n: usize,
    f: Vec<usize>,
    c: Vec<usize>,
    /// Per `F` row: couplings to `F` positions and to `C` positions.
    ff: Vec<Vec<(usize, f64)>>,
    fc: Vec<Vec<(usize, f64)>>,
    diag: Vec<f64>,
    ext: Vec<f64>,
    pub iterations: usize,
}

/// Rounds needed for accuracy `eps` on an `alpha`-SDD block.
pub fn extension_rounds(alpha: f64, eps: f64) -> usize {
    let t = ((1.0 + 1.0 / alpha).sqrt().ln() + (1.0 / eps).ln()) / (1.0 + alpha).ln();
    t.ceil().max(0.0) as usize
}

impl VoltageExtension {
    /// `f` sorted; `M[F, F]` must be `alpha`-SDD.
    pub fn new(m: &SddMatrix, f: &[usize], alpha: f64, eps: f64) -> Self {
        let n = m.n();
        let mut pos = vec![(false, 0usize); n];
        for (k, &i) in f.iter().enumerate() {
            pos[i] = (true, k);
        }
        let mut c = Vec::with_capacity(n - f.len());
        for (i, p) in pos.iter_mut().enumerate() {
            if !p.0 {
                p.1 = c.len();
                c.push(i);
            }
        }
        let mut ff = Vec::with_capacity(f.len());
        let mut fc = Vec::with_capacity(f.len());
        let mut diag = Vec::with_capacity(f.len());
        let mut ext = Vec::with_capacity(f.len());
        for &i in f {
            let mut a = Vec::new();
            let mut b = Vec::new();
            let mut inner = 0.0;
            for (j, v) in m.row(i) {
                let (in_f, k) = pos[j];
                if in_f {
                    a.push((k, -v));
                    inner -= v;
                } else {
                    b.push((k, -v));
                }
            }
            let d = m.diag()[i];
            diag.push(d);
            ext.push(d - inner);
            ff.push(a);
            fc.push(b);
        }
        VoltageExtension {
            n,
            f: f.to_vec(),
            c,
            ff,
            fc,
            diag,
            ext,
            iterations: extension_rounds(alpha, eps),
        }
    }

    pub fn f(&self) -> &[usize] {
        &self.f
    }

    pub fn c(&self) -> &[usize] {
        &self.c
    }

    fn weighted(row: &[(usize, f64)], v: &[f64]) -> f64 {
        row.iter().map(|&(k, w)| w * v[k]).sum()
    }

    /// Full vector from values on `C`.
    pub fn apply(&self, xc: &[f64]) -> Vec<f64> {
        assert_eq!(xc.len(), self.c.len());
        let nf = self.f.len();
        let mut xf: Vec<f64> = (0..nf)
            .map(|k| {
                if self.ext[k] > 0.0 {
                    Self::weighted(&self.fc[k], xc) / self.ext[k]
                } else {
                    0.0
                }
            })
            .collect();
        let mut next = vec![0.0; nf];
        for _ in 0..self.iterations {
            for k in 0..nf {
                next[k] = if self.diag[k] > 0.0 {
                    (Self::weighted(&self.ff[k], &xf) + Self::weighted(&self.fc[k], xc)) / self.diag[k]
                } else {
                    0.0
                };
            }
            std::mem::swap(&mut xf, &mut next);
        }
        let mut out = vec![0.0; self.n];
        for (k, &i) in self.c.iter().enumerate() {
            out[i] = xc[k];
        }
        for (k, &i) in self.f.iter().enumerate() {
            out[i] = xf[k];
        }
        out
    }

    /// Transpose of [`apply`](Self::apply): a full vector to values on `C`.
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.n);
        let nf = self.f.len();
        let mut acc: Vec<f64> = self.c.iter().map(|&i| y[i]).collect();
        let mut w: Vec<f64> = self.f.iter().map(|&i| y[i]).collect();
        let mut next = vec![0.0; nf];
        for _ in 0..self.iterations {
            // acc += H^T w ; w = J^T w, with H = D^-1 W_FC and J = D^-1 W_FF.
            next.iter_mut().for_each(|v| *v = 0.0);
            for k in 0..nf {
                if self.diag[k] <= 0.0 {
                    continue;
                }
                let s = w[k] / self.diag[k];
                for &(c, wt) in &self.fc[k] {
                    acc[c] += wt * s;
                }
                for &(j, wt) in &self.ff[k] {
                    next[j] += wt * s;
                }
            }
            std::mem::swap(&mut w, &mut next);
        }
        for k in 0..nf {
            if self.ext[k] > 0.0 {
                let s = w[k] / self.ext[k];
                for &(c, wt) in &self.fc[k] {
                    acc[c] += wt * s;
                }
            }
        }
        acc
    }
}
