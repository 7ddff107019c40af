//! Golden-section search for the maximum of a unimodal scalar function.

/// 1/φ
const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Maximizes `f` over `[lo, hi]` until the bracket is narrower than `tol`.
///
/// Each iteration reuses one interior evaluation, so the cost is one call
/// of `f` per iteration. The endpoints are compared against the interior
/// optimum at the end so that a maximum sitting on the boundary is found.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Maximum
where
    F: FnMut(f64) -> f64,
{
    assert!(lo <= hi, "empty bracket [{lo}, {hi}]");
    assert!(tol > 0.0, "tolerance must be positive");

    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;

    while (b - a) > tol {
        iterations += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }

    let x = 0.5 * (a + b);
    let mut best = Maximum {
        x,
        value: f(x),
        iterations,
    };
    for edge in [lo, hi] {
        let v = f(edge);
        if v > best.value {
            best.x = edge;
            best.value = v;
        }
    }
    best
}
