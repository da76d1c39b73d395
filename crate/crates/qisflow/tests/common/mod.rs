//! Independent oracles for the integration suites.
//!
//! Everything here recomputes library quantities by a different route:
//! eigenvalues through the characteristic polynomial instead of rotations,
//! the SLD through a dense real linear system instead of the eigenbasis
//! shortcut, multiplication through the textbook triple loop. Agreement is
//! then evidence, not circularity.

use qisflow::{Complex64, ComplexMatrix, DensityMatrix, HermitianMatrix, TangentMatrix};

/// Textbook product, accumulating over `k` in ascending order. The library
/// uses the same summation order, so agreement must be bit-exact.
pub fn multiply_oracle(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(a.dim(), b.dim());
    let m = a.dim();
    let mut entries = vec![Complex64::new(0.0, 0.0); m * m];
    for i in 0..m {
        for j in 0..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..m {
                acc += a.get(i, k) * b.get(k, j);
            }
            entries[i * m + j] = acc;
        }
    }
    ComplexMatrix::new(m, entries).expect("oracle product is well-formed")
}

/// Determinant by LU decomposition with partial pivoting.
pub fn det_oracle(matrix: &ComplexMatrix) -> Complex64 {
    let m = matrix.dim();
    let mut a: Vec<Complex64> = (0..m * m).map(|idx| matrix.get(idx / m, idx % m)).collect();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..m {
        let pivot_row = (col..m)
            .max_by(|&p, &q| {
                a[p * m + col]
                    .norm()
                    .partial_cmp(&a[q * m + col].norm())
                    .unwrap()
            })
            .unwrap();
        if a[pivot_row * m + col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot_row != col {
            for j in 0..m {
                a.swap(col * m + j, pivot_row * m + j);
            }
            det = -det;
        }
        let pivot = a[col * m + col];
        det *= pivot;
        for row in col + 1..m {
            let factor = a[row * m + col] / pivot;
            for j in col..m {
                let sub = factor * a[col * m + j];
                a[row * m + j] -= sub;
            }
        }
    }
    det
}

/// Eigenvalues of a Hermitian matrix through its characteristic
/// polynomial: Gershgorin interval, sign-change scan, bisection. Returns
/// the ascending roots; panics unless the scan brackets exactly `dim`
/// simple roots, so callers should feed it matrices with well-separated
/// spectra (random draws qualify).
pub fn charpoly_eigenvalues(matrix: &HermitianMatrix) -> Vec<f64> {
    let m = matrix.dim();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let center = matrix.get(i, i).re;
        let radius: f64 = (0..m)
            .filter(|&j| j != i)
            .map(|j| matrix.get(i, j).norm())
            .sum();
        lo = lo.min(center - radius);
        hi = hi.max(center + radius);
    }
    let scale = lo.abs().max(hi.abs()).max(1.0);
    let lo = lo - 1e-6 * scale;
    let hi = hi + 1e-6 * scale;

    let shifted_det = |lambda: f64| -> f64 {
        let mut entries: Vec<Complex64> =
            (0..m * m).map(|idx| matrix.get(idx / m, idx % m)).collect();
        for i in 0..m {
            entries[i * m + i] -= Complex64::new(lambda, 0.0);
        }
        det_oracle(&ComplexMatrix::new(m, entries).unwrap()).re
    };

    let grid = 4000;
    let step = (hi - lo) / grid as f64;
    let mut brackets = Vec::new();
    let mut prev = shifted_det(lo);
    for i in 1..=grid {
        let x = lo + i as f64 * step;
        let here = shifted_det(x);
        if prev == 0.0 {
            brackets.push((lo + (i - 1) as f64 * step, lo + (i - 1) as f64 * step));
        } else if prev * here < 0.0 {
            brackets.push((x - step, x));
        }
        prev = here;
    }
    assert_eq!(
        brackets.len(),
        m,
        "characteristic polynomial scan must isolate every eigenvalue"
    );

    brackets
        .into_iter()
        .map(|(mut a, mut b)| {
            if a == b {
                return a;
            }
            let mut fa = shifted_det(a);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                let fm = shifted_det(mid);
                if fm == 0.0 || (b - a) < 1e-13 * scale {
                    return mid;
                }
                if fa * fm < 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

fn add_complex_coefficient(
    system: &mut [Vec<f64>],
    row_re: usize,
    row_im: usize,
    unknown: usize,
    coefficient: Complex64,
) {
    // coefficient * (x + i y) contributes (c.re x - c.im y) to the real
    // equation and (c.im x + c.re y) to the imaginary one.
    system[row_re][2 * unknown] += coefficient.re;
    system[row_re][2 * unknown + 1] -= coefficient.im;
    system[row_im][2 * unknown] += coefficient.im;
    system[row_im][2 * unknown + 1] += coefficient.re;
}

// Index loops stay: the elimination reads one row while writing another.
#[allow(clippy::needless_range_loop)]
fn gaussian_solve(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Vec<f64> {
    let n = rhs.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&p, &q| a[p][col].abs().partial_cmp(&a[q][col].abs()).unwrap())
            .unwrap();
        assert!(
            a[pivot_row][col].abs() > 1e-300,
            "singular system in the SLD oracle"
        );
        a.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        let pivot = a[col][col];
        for row in col + 1..n {
            let factor = a[row][col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                a[row][j] -= factor * a[col][j];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for j in row + 1..n {
            acc -= a[row][j] * x[j];
        }
        x[row] = acc / a[row][row];
    }
    x
}

/// Solves `(1/2)(rho L + L rho) = xi` as a dense real linear system in the
/// `2 m^2` real unknowns of `L`, with no Hermiticity assumption and no
/// eigenbasis. The unique solution for a regular `rho` comes back as full
/// complex entries, row-major.
pub fn sld_linear_system_oracle(rho: &DensityMatrix, xi: &TangentMatrix) -> Vec<Complex64> {
    let m = rho.dim();
    let n = 2 * m * m;
    let mut system = vec![vec![0.0_f64; n]; n];
    let mut rhs = vec![0.0_f64; n];
    let r = rho.as_matrix();
    for a in 0..m {
        for b in 0..m {
            let row_re = 2 * (a * m + b);
            let row_im = row_re + 1;
            for k in 0..m {
                // (1/2) rho_{a k} multiplies L_{k b}; (1/2) rho_{k b}
                // multiplies L_{a k}. The diagonal unknown L_{a b} can
                // receive both contributions, hence the additive helper.
                add_complex_coefficient(&mut system, row_re, row_im, k * m + b, 0.5 * r.get(a, k));
                add_complex_coefficient(&mut system, row_re, row_im, a * m + k, 0.5 * r.get(k, b));
            }
            let target = xi.get(a, b);
            rhs[row_re] = target.re;
            rhs[row_im] = target.im;
        }
    }
    let x = gaussian_solve(system, rhs);
    (0..m * m)
        .map(|idx| Complex64::new(x[2 * idx], x[2 * idx + 1]))
        .collect()
}

/// Largest entrywise distance between a library matrix and oracle entries.
pub fn max_abs_entry_diff(matrix: &ComplexMatrix, entries: &[Complex64]) -> f64 {
    let m = matrix.dim();
    let mut worst = 0.0_f64;
    for i in 0..m {
        for j in 0..m {
            worst = worst.max((matrix.get(i, j) - entries[i * m + j]).norm());
        }
    }
    worst
}
