use num_complex::Complex64;

use super::element::{SmashElement, DEFAULT_X_CAP};
use super::expansion::{MultiSlotExpansion, SlotPowers};
use crate::compositions::{multinomial, Compositions};
use crate::error::{Result, SmashError};
use crate::par;
use crate::qcalculus::{q_multinomial, Deformation};

/// The (n-1)-fold coproduct of `x^k ξ^l` spread over `n` slots:
///
/// ```text
/// Σ_{i ⊢ k} Σ_{j ⊢ l} (k; i) [l; j]_q  x^{i_1}ξ^{j_1} ⊗ … ⊗ x^{i_n}ξ^{j_n}
/// ```
///
/// with ordinary multinomials in the x-sector and q-multinomials in the
/// ξ-sector. No power of the cross braiding `Q` enters.
pub fn coproduct_power(k: usize, l: usize, n: usize, d: &Deformation) -> Result<MultiSlotExpansion> {
    d.check_xi_power(l)?;
    if n == 0 {
        return Err(SmashError::InvalidParameter("coproduct needs at least one slot".into()));
    }
    let x_cap = DEFAULT_X_CAP.max(k);
    let x_parts: Vec<Vec<usize>> = Compositions::new(k, n).collect();
    let xi_parts: Vec<(Vec<usize>, Complex64)> = Compositions::new(l, n)
        .map(|j| {
            let c = q_multinomial(l, &j, d)?;
            Ok((j, c))
        })
        .collect::<Result<_>>()?;

    let partials: Vec<Vec<(SlotPowers, Complex64)>> = par::map_collect(&x_parts, |i| {
        let xc = multinomial(i);
        xi_parts.iter().map(|(j, qc)| (i.iter().copied().zip(j.iter().copied()).collect(), qc * xc)).collect()
    });

    let mut out = MultiSlotExpansion::zero_with_cap(n, x_cap);
    for (p, c) in partials.into_iter().flatten() {
        out.add_term(p, c)?;
    }
    Ok(out)
}

/// Linear extension of [`coproduct_power`] to a whole element.
pub fn coproduct(f: &SmashElement, n: usize) -> Result<MultiSlotExpansion> {
    let d = f.deformation();
    let mut out = MultiSlotExpansion::zero_with_cap(n, f.x_cap());
    for ((k, l), c) in f.terms() {
        out = out.add(&coproduct_power(k, l, n, d)?.scale(c).with_x_cap(f.x_cap()))?;
    }
    Ok(out)
}
