//! Lindblad generator acting on a packed Hermitian density matrix.
//!
//! Internally states are indexed Fock-major, x = n·M + q, so every coupling
//! of the model links indices at most M apart. Only the upper triangle is
//! evolved; row x stores columns [x − M, d + M), where the M columns left of
//! the diagonal mirror the conjugate band entries and the right pad is zero.
//! With that padding every neighbour access in the right-hand side is a
//! contiguous slice. Real parts occupy the first half of the state vector and
//! imaginary parts the second.

use num_complex::Complex64 as C64;

use crate::dispersive::DriveContext;
use crate::error::{Error, Result};
use crate::quantum::{DensityMatrix, HilbertLayout};
use crate::qubit::QubitSpec;

/// Packed storage geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct PackedLayout {
    layout: HilbertLayout,
    pad: usize,
    starts: Vec<usize>,
    len: usize,
}

impl PackedLayout {
    pub fn new(layout: HilbertLayout) -> Self {
        let d = layout.dim();
        let pad = layout.levels();
        let mut starts = Vec::with_capacity(d + 1);
        let mut acc = 0;
        for x in 0..d {
            starts.push(acc);
            acc += d - x + 2 * pad;
        }
        starts.push(acc);
        Self { layout, pad, starts, len: acc }
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    /// Stored complex entries; the state vector holds twice as many reals.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// Internal index of (qubit level, photon number).
    #[inline]
    pub fn internal(&self, level: usize, n: usize) -> usize {
        n * self.layout.levels() + level
    }

    /// Storage offset of (x, y) for y ≥ x − pad.
    #[inline]
    pub fn offset(&self, x: usize, y: usize) -> usize {
        self.starts[x] + y + self.pad - x
    }

    /// Range of row x holding columns x..d.
    #[inline]
    pub fn upper_row(&self, x: usize) -> std::ops::Range<usize> {
        let s = self.starts[x] + self.pad;
        s..s + self.dim() - x
    }

    #[inline]
    fn row(&self, x: usize) -> std::ops::Range<usize> {
        self.starts[x]..self.starts[x + 1]
    }

    #[inline]
    fn at(&self, data: &[f64], k: usize) -> C64 {
        C64::new(data[k], data[self.len + k])
    }

    /// Element (x, y) for any x, y (lower triangle through conjugation).
    pub fn get(&self, data: &[f64], x: usize, y: usize) -> C64 {
        if y >= x {
            self.at(data, self.offset(x, y))
        } else {
            self.at(data, self.offset(y, x)).conj()
        }
    }

    /// Refreshes the left pads from the upper triangle.
    pub fn mirror_band(&self, data: &mut [f64]) {
        let (re, im) = data.split_at_mut(self.len);
        for x in 0..self.dim() {
            for k in 0..self.pad {
                let dst = self.starts[x] + k;
                if x + k >= self.pad {
                    let src = self.offset(x + k - self.pad, x);
                    re[dst] = re[src];
                    im[dst] = -im[src];
                } else {
                    re[dst] = 0.0;
                    im[dst] = 0.0;
                }
            }
        }
    }

    pub fn pack(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        if rho.layout() != &self.layout {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: rho.dim() });
        }
        let (m, n) = (self.layout.levels(), self.layout.fock());
        let mut data = vec![0.0; 2 * self.len];
        for q1 in 0..m {
            for n1 in 0..n {
                let x = self.internal(q1, n1);
                for q2 in 0..m {
                    for n2 in 0..n {
                        let y = self.internal(q2, n2);
                        if y >= x {
                            let v = rho.get(self.layout.index(q1, n1), self.layout.index(q2, n2));
                            let k = self.offset(x, y);
                            data[k] = v.re;
                            data[self.len + k] = v.im;
                        }
                    }
                }
            }
        }
        self.mirror_band(&mut data);
        Ok(data)
    }

    pub fn unpack(&self, data: &[f64], time: f64) -> DensityMatrix {
        let (m, n, d) = (self.layout.levels(), self.layout.fock(), self.dim());
        let mut out = vec![C64::new(0.0, 0.0); d * d];
        for q1 in 0..m {
            for n1 in 0..n {
                let x = self.internal(q1, n1);
                let r = self.layout.index(q1, n1);
                for q2 in 0..m {
                    for n2 in 0..n {
                        let y = self.internal(q2, n2);
                        out[r * d + self.layout.index(q2, n2)] = self.get(data, x, y);
                    }
                }
            }
        }
        DensityMatrix::from_row_major(self.layout, out, time).expect("packed layout matches")
    }

    fn diagonal(&self, data: &[f64], level: usize, n: usize) -> f64 {
        let x = self.internal(level, n);
        data[self.offset(x, x)]
    }

    pub fn trace(&self, data: &[f64]) -> f64 {
        (0..self.dim()).map(|x| data[self.offset(x, x)]).sum()
    }

    pub fn populations(&self, data: &[f64]) -> Vec<f64> {
        let (m, n) = (self.layout.levels(), self.layout.fock());
        (0..m).map(|q| (0..n).map(|k| self.diagonal(data, q, k)).sum()).collect()
    }

    pub fn fock_distribution(&self, data: &[f64]) -> Vec<f64> {
        let (m, n) = (self.layout.levels(), self.layout.fock());
        (0..n).map(|k| (0..m).map(|q| self.diagonal(data, q, k)).sum()).collect()
    }

    /// ⟨a⟩ = Σ √(n+1) ρ[(q,n+1),(q,n)].
    pub fn mean_field(&self, data: &[f64]) -> C64 {
        let (m, n) = (self.layout.levels(), self.layout.fock());
        let mut acc = C64::new(0.0, 0.0);
        for q in 0..m {
            for k in 0..n - 1 {
                let v = self.get(data, self.internal(q, k + 1), self.internal(q, k));
                acc += v * ((k + 1) as f64).sqrt();
            }
        }
        acc
    }

    /// Error norm over the complex entries of the upper triangle.
    pub fn rms_error(&self, err: &[f64], y0: &[f64], y1: &[f64], rel_tol: f64, abs_tol: f64) -> f64 {
        let l = self.len;
        let mut acc = 0.0;
        let mut count = 0usize;
        for x in 0..self.dim() {
            let r = self.upper_row(x);
            count += r.len();
            for k in r {
                let a = y0[k] * y0[k] + y0[l + k] * y0[l + k];
                let b = y1[k] * y1[k] + y1[l + k] * y1[l + k];
                let scale = abs_tol + rel_tol * a.max(b).sqrt();
                acc += (err[k] * err[k] + err[l + k] * err[l + k]) / (scale * scale);
            }
        }
        (acc / count as f64).sqrt()
    }
}

#[inline]
fn window(src: &[f64], start: usize, len: usize) -> &[f64] {
    &src[start..start + len]
}

/// Rotating-frame model coefficients in internal ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    packed: PackedLayout,
    /// Γₓ/2 and Dₓ, with D the diagonal of H and Γ the diagonal of Σ L†L.
    decay: Vec<f64>,
    energy: Vec<f64>,
    /// √(n+1) below the Fock ceiling: H[x, x+M] per unit drive, and the
    /// resonator jump amplitude.
    sqrt_up: Vec<f64>,
    sqrt_up_shift: Vec<f64>,
    /// H[x, x+M−1] = g_{q−1}√(n+1) (Jaynes-Cummings exchange).
    exchange: Vec<f64>,
    exchange_shift: Vec<f64>,
    kappa: f64,
    /// γ(g_q/g₀)² for the q+1 → q jump.
    qubit_jump: Vec<f64>,
    zeros: Vec<f64>,
}

impl Generator {
    pub fn new(layout: HilbertLayout, spec: &QubitSpec, ctx: &DriveContext, gamma: f64) -> Result<Self> {
        let m = layout.levels();
        let n_fock = layout.fock();
        if spec.levels() < m {
            return Err(Error::InvalidSpec(format!("spec has {} levels, layout needs {m}", spec.levels())));
        }
        let packed = PackedLayout::new(layout);
        let d = layout.dim();
        let g = spec.couplings();
        let w = spec.freqs();
        let g0 = g[0];
        let qubit_jump: Vec<f64> = (0..m).map(|q| if q + 1 < m { gamma * (g[q] / g0).powi(2) } else { 0.0 }).collect();

        let mut decay = vec![0.0; d];
        let mut energy = vec![0.0; d];
        let mut sqrt_up = vec![0.0; d];
        let mut exchange = vec![0.0; d];
        for n in 0..n_fock {
            for q in 0..m {
                let x = packed.internal(q, n);
                let nf = n as f64;
                energy[x] = w[q] - q as f64 * ctx.omega_d
                    + (ctx.omega_r - ctx.omega_d) * nf
                    + 0.5 * ctx.kerr * nf * (nf - 1.0);
                decay[x] = 0.5 * (ctx.kappa * nf + if q >= 1 { qubit_jump[q - 1] } else { 0.0 });
                if n + 1 < n_fock {
                    sqrt_up[x] = (nf + 1.0).sqrt();
                    if q >= 1 {
                        exchange[x] = g[q - 1] * (nf + 1.0).sqrt();
                    }
                }
            }
        }
        let sqrt_up_shift = (0..d).map(|c| if c >= m { sqrt_up[c - m] } else { 0.0 }).collect();
        let exchange_shift = (0..d).map(|c| if c + 1 >= m { exchange[c + 1 - m] } else { 0.0 }).collect();
        Ok(Self {
            packed,
            decay,
            energy,
            sqrt_up,
            sqrt_up_shift,
            exchange,
            exchange_shift,
            kappa: ctx.kappa,
            qubit_jump,
            zeros: vec![0.0; d],
        })
    }

    pub fn packed(&self) -> &PackedLayout {
        &self.packed
    }

    /// dρ/dt for drive amplitude `eps` (upper triangle and band mirror).
    pub fn apply(&self, eps: f64, rho: &[f64], out: &mut [f64]) {
        let (re, im) = rho.split_at(self.packed.len);
        let (out_re, out_im) = out.split_at_mut(self.packed.len);
        self.apply_split(eps, re, im, out_re, out_im);
        self.packed.mirror_band(out);
    }

    /// dρ[r,c] = −((Γ_r + Γ_c)/2 + i(D_r − D_c))ρ[r,c] − i[H_off, ρ][r,c]
    ///           + κ√(n_r+1)√(n_c+1)ρ[r+M,c+M] + qubit jumps.
    fn apply_split(&self, eps: f64, re: &[f64], im: &[f64], out_re: &mut [f64], out_im: &mut [f64]) {
        let p = &self.packed;
        let d = p.dim();
        let m = p.layout.levels();
        let pad = p.pad;
        let zeros = &self.zeros[..];
        for r in 0..d {
            let len = d - r;
            let row = p.row(r);
            let (row_re, row_im) = (&re[row.clone()], &im[row]);
            // Column-indexed neighbours of row r: col c ↦ row[c − r + shift].
            let (same_re, same_im) = (window(row_re, pad, len), window(row_im, pad, len));
            let (up_re, up_im) = (window(row_re, 2 * pad, len), window(row_im, 2 * pad, len));
            let (down_re, down_im) = (window(row_re, 0, len), window(row_im, 0, len));
            let (xu_re, xu_im) = (window(row_re, 2 * pad - 1, len), window(row_im, 2 * pad - 1, len));
            let (xd_re, xd_im) = (window(row_re, 1, len), window(row_im, 1, len));

            let (dec, en) = (window(&self.decay, r, len), window(&self.energy, r, len));
            let (su, sus) = (window(&self.sqrt_up, r, len), window(&self.sqrt_up_shift, r, len));
            let (ex, exs) = (window(&self.exchange, r, len), window(&self.exchange_shift, r, len));
            let (dec_r, en_r) = (self.decay[r], self.energy[r]);

            // Rows x coupled to r through H, read from column r onwards.
            let neighbour = |x: Option<usize>, coef: f64| match x {
                Some(x) if coef != 0.0 => {
                    let s = p.offset(x, r);
                    (&re[s..s + len], &im[s..s + len], coef)
                }
                _ => (&zeros[..len], &zeros[..len], 0.0),
            };
            let (a_re, a_im, ca) = neighbour((r + m < d).then_some(r + m), eps * self.sqrt_up[r]);
            let (b_re, b_im, cb) = neighbour(r.checked_sub(m), r.checked_sub(m).map_or(0.0, |x| eps * self.sqrt_up[x]));
            let (c_re, c_im, cc) = neighbour((r + m - 1 < d).then_some(r + m - 1), self.exchange[r]);
            let (d_re, d_im, cd) =
                neighbour((r + 1).checked_sub(m), (r + 1).checked_sub(m).map_or(0.0, |x| self.exchange[x]));
            // κ a ρ a†, reading the zero pad beyond d.
            let (k_re, k_im, kr) = if r + m < d {
                let s = p.offset(r + m, r + m);
                (&re[s..s + len], &im[s..s + len], self.kappa * self.sqrt_up[r])
            } else {
                (&zeros[..len], &zeros[..len], 0.0)
            };

            let upper = p.upper_row(r);
            let o_re = &mut out_re[upper.clone()];
            let o_im = &mut out_im[upper];
            for k in 0..len {
                let col_re = (up_re[k] * su[k] + down_re[k] * sus[k]) * eps + xu_re[k] * ex[k] + xd_re[k] * exs[k];
                let col_im = (up_im[k] * su[k] + down_im[k] * sus[k]) * eps + xu_im[k] * ex[k] + xd_im[k] * exs[k];
                let row_re = a_re[k] * ca + b_re[k] * cb + c_re[k] * cc + d_re[k] * cd;
                let row_im = a_im[k] * ca + b_im[k] * cb + c_im[k] * cc + d_im[k] * cd;
                let h_re = col_re - row_re;
                let h_im = col_im - row_im;
                let g_re = -(dec_r + dec[k]);
                let g_im = en[k] - en_r;
                let jump = kr * su[k];
                o_re[k] = g_re * same_re[k] - g_im * same_im[k] - h_im + k_re[k] * jump;
                o_im[k] = g_re * same_im[k] + g_im * same_re[k] + h_re + k_im[k] * jump;
            }

            // Qubit jumps stay within equal qubit indices: c ≡ r (mod M).
            let w = self.qubit_jump[r % m];
            if w != 0.0 {
                let s = p.offset(r + 1, r + 1);
                for k in (0..len).step_by(m) {
                    o_re[k] += re[s + k] * w;
                    o_im[k] += im[s + k] * w;
                }
            }
        }
    }
}
