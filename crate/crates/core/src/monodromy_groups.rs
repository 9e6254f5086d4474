//! The monodromy groups of a Clifford torus inside GL(2,ℤ).
//!
//! * G_μ, the stabilizer of the Maslov class μ = (2 2), split by determinant
//!   into the cyclic part {g_n} and the reflections {f_n}; it is the infinite
//!   dihedral group on f₀, f₁.
//! * 𝒳, the matrices whose Maslov defect μ∘g − μ is divisible by 4, split into
//!   the diagonal-odd part 𝒳ᵒ and the antidiagonal-odd part 𝒳ᵉ = f₁𝒳ᵒ.
//! * ℰ ⊂ 𝒳ᵒ, the free group on τ₁², τ₂², recognised by its mod-4 pattern.
//!
//! Decompositions return words over [`Letter`] that re-evaluate to the input.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gl2z::{GeneratorWord, Letter, MaslovCovector, Mat2Z};

/// Longest word a decomposition will emit.
pub const MAX_WORD_LEN: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupTag {
    Gmu,
    GmuPlus,
    GmuMinus,
    Xo,
    Xe,
    E,
    NotMember,
}

impl GroupTag {
    pub fn name(self) -> &'static str {
        match self {
            GroupTag::Gmu => "Gmu",
            GroupTag::GmuPlus => "GmuPlus",
            GroupTag::GmuMinus => "GmuMinus",
            GroupTag::Xo => "Xo",
            GroupTag::Xe => "Xe",
            GroupTag::E => "E",
            GroupTag::NotMember => "NotMember",
        }
    }
}

/// Every group a matrix belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Membership {
    pub det: i64,
    pub gmu: bool,
    pub x_odd: bool,
    pub x_even: bool,
    pub sanov: bool,
}

impl Membership {
    pub fn in_x(&self) -> bool {
        self.x_odd || self.x_even
    }

    /// The most specific tag: G_μ± first, then ℰ, then 𝒳ᵒ/𝒳ᵉ.
    ///
    /// G_μ ⊂ 𝒳 (its defect is zero), so every tag other than `NotMember`
    /// implies 𝒳-membership.
    pub fn tag(&self) -> GroupTag {
        if self.gmu {
            if self.det == 1 {
                GroupTag::GmuPlus
            } else {
                GroupTag::GmuMinus
            }
        } else if self.sanov {
            GroupTag::E
        } else if self.x_odd {
            GroupTag::Xo
        } else if self.x_even {
            GroupTag::Xe
        } else {
            GroupTag::NotMember
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub word: GeneratorWord,
    pub verified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaslovDefect {
    pub defect: MaslovCovector,
    pub divisible_by_four: bool,
}

/// g_n = (1−n, −n; n, 1+n).
pub fn make_g(n: i64) -> Result<Mat2Z> {
    let one_minus = 1i64.checked_sub(n).ok_or(Error::Overflow)?;
    let one_plus = 1i64.checked_add(n).ok_or(Error::Overflow)?;
    let neg = n.checked_neg().ok_or(Error::Overflow)?;
    Ok(Mat2Z::new(one_minus, neg, n, one_plus))
}

/// f_n = (1−n, 2−n; n, n−1).
pub fn make_f(n: i64) -> Result<Mat2Z> {
    let one_minus = 1i64.checked_sub(n).ok_or(Error::Overflow)?;
    let two_minus = 2i64.checked_sub(n).ok_or(Error::Overflow)?;
    let minus_one = n.checked_sub(1).ok_or(Error::Overflow)?;
    Ok(Mat2Z::new(one_minus, two_minus, n, minus_one))
}

fn is_odd(x: i64) -> bool {
    x.rem_euclid(2) == 1
}

fn is_one_mod_four(x: i64) -> bool {
    x.rem_euclid(4) == 1
}

pub fn memberships(m: &Mat2Z) -> Result<Membership> {
    let det = m.unimodular_det()?;
    let image = MaslovCovector::CLIFFORD.compose(m)?;
    let gmu = image == MaslovCovector::CLIFFORD;
    let x_odd = is_odd(m.a11) && is_odd(m.a22) && !is_odd(m.a12) && !is_odd(m.a21);
    let x_even = !is_odd(m.a11) && !is_odd(m.a22) && is_odd(m.a12) && is_odd(m.a21);
    let sanov = x_odd && is_one_mod_four(m.a11) && is_one_mod_four(m.a22);
    Ok(Membership {
        det,
        gmu,
        x_odd,
        x_even,
        sanov,
    })
}

pub fn classify(m: &Mat2Z) -> Result<GroupTag> {
    Ok(memberships(m)?.tag())
}

fn push_repeated(out: &mut Vec<Letter>, letters: &[Letter], times: u64) -> Result<()> {
    let added = (letters.len() as u64).saturating_mul(times);
    if out.len() as u64 + added > MAX_WORD_LEN as u64 {
        return Err(Error::InvalidInput(format!(
            "decomposition would exceed {MAX_WORD_LEN} letters"
        )));
    }
    for _ in 0..times {
        out.extend_from_slice(letters);
    }
    Ok(())
}

fn finish(m: &Mat2Z, letters: Vec<Letter>) -> Result<Decomposition> {
    let word = GeneratorWord::new(letters);
    let verified = word.eval()? == *m;
    if !verified {
        return Err(Error::Degenerate(format!(
            "word {word} does not re-evaluate to {m}"
        )));
    }
    Ok(Decomposition { word, verified })
}

/// Word over {F0, F1} for an element of G_μ.
pub fn decompose_gmu(m: &Mat2Z) -> Result<Decomposition> {
    let mem = memberships(m)?;
    if !mem.gmu {
        return Err(Error::NotMember {
            group: "G_mu",
            matrix: *m,
        });
    }
    // Both g_n and f_n = g_n f₀ carry n in the lower-left entry.
    let n = m.a21;
    let mut letters = Vec::new();
    if n >= 0 {
        push_repeated(&mut letters, &[Letter::F1, Letter::F0], n.unsigned_abs())?;
    } else {
        push_repeated(&mut letters, &[Letter::F0, Letter::F1], n.unsigned_abs())?;
    }
    if mem.det == -1 {
        letters.push(Letter::F0);
    }
    finish(m, letters)
}

/// Integer k minimising |x + k·d| for d ≠ 0.
fn nearest_multiple(x: i64, d: i64) -> Result<i64> {
    // |x + k·d| = |−x + k·(−d)|, so normalise to d > 0.
    let (x, d) = if d < 0 { (-(x as i128), -(d as i128)) } else { (x as i128, d as i128) };
    let k0 = (-x).div_euclid(d);
    let cost = |k: i128| (x + k * d).abs();
    let k = if cost(k0 + 1) < cost(k0) { k0 + 1 } else { k0 };
    i64::try_from(k).map_err(|_| Error::Overflow)
}

/// Freely reduced word over the τ letters for an element of ℰ.
///
/// Euclidean left reduction of the first column: the ℓ¹ norm |a11| + |a21|
/// strictly decreases until a21 = 0, leaving τ₁^{2s}.
pub fn decompose_e(m: &Mat2Z) -> Result<Decomposition> {
    let mem = memberships(m)?;
    if !mem.sanov {
        return Err(Error::NotMember {
            group: "E",
            matrix: *m,
        });
    }
    let measure = |x: &Mat2Z| x.a11.unsigned_abs() as u128 + x.a21.unsigned_abs() as u128;
    let mut cur = *m;
    let mut letters = Vec::new();
    while cur.a21 != 0 {
        let before = measure(&cur);
        let first_row = cur.a11.unsigned_abs() > cur.a21.unsigned_abs();
        let (k, plus, minus) = if first_row {
            let d = cur.a21.checked_mul(2).ok_or(Error::Overflow)?;
            (nearest_multiple(cur.a11, d)?, Letter::T1P2, Letter::T1M2)
        } else {
            let d = cur.a11.checked_mul(-2).ok_or(Error::Overflow)?;
            (nearest_multiple(cur.a21, d)?, Letter::T2P2, Letter::T2M2)
        };
        // Left-multiplying by τ^{2k} means the answer gains τ^{-2k}.
        let recorded = if k > 0 { minus } else { plus };
        push_repeated(&mut letters, &[recorded], k.unsigned_abs())?;
        let two_k = k.checked_mul(2).ok_or(Error::Overflow)?;
        let step = if first_row {
            Mat2Z::new(1, two_k, 0, 1)
        } else {
            Mat2Z::new(1, 0, two_k.checked_neg().ok_or(Error::Overflow)?, 1)
        };
        cur = step.checked_mul(&cur)?;
        if measure(&cur) >= before {
            return Err(Error::Stalled(cur));
        }
    }
    if cur.a11 != 1 || cur.a22 != 1 || is_odd(cur.a12) {
        return Err(Error::Stalled(cur));
    }
    let s = cur.a12 / 2;
    let tail = if s >= 0 { Letter::T1P2 } else { Letter::T1M2 };
    push_repeated(&mut letters, &[tail], s.unsigned_abs())?;
    finish(m, letters)
}

fn rewrite_over_f0_f1_r1(letter: Letter) -> &'static [Letter] {
    use Letter::*;
    match letter {
        F0 => &[F0],
        F1 => &[F1],
        R1 => &[R1],
        R2 => &[F1, R1, F1],
        T1P2 => &[F1, R1, F1, F0],
        T1M2 => &[F0, F1, R1, F1],
        T2P2 => &[F1, F0, F1, R1],
        T2M2 => &[R1, F1, F0, F1],
    }
}

/// Word over {F0, F1, R1} for an element of 𝒳.
///
/// Moves 𝒳ᵉ into 𝒳ᵒ with f₁, fixes the diagonal residues mod 4 with r̄₁ and
/// r̄₂ to land in ℰ, decomposes there, then rewrites τ and r̄₂ letters.
pub fn decompose_x(m: &Mat2Z) -> Result<Decomposition> {
    let mem = memberships(m)?;
    if !mem.in_x() {
        return Err(Error::NotMember {
            group: "X",
            matrix: *m,
        });
    }
    let mut prefix = Vec::new();
    let mut cur = *m;
    if mem.x_even {
        prefix.push(Letter::F1);
        cur = Letter::F1.matrix().checked_mul(&cur)?;
    }
    // cur = (1+2p, 2s; 2r, 1+2q); r̄₁ flips the parity of p, r̄₂ that of q.
    let p_odd = !is_one_mod_four(cur.a11);
    let q_odd = !is_one_mod_four(cur.a22);
    let fix: &[Letter] = match (p_odd, q_odd) {
        (false, false) => &[],
        (true, true) => &[Letter::R1, Letter::R2],
        (true, false) => &[Letter::R1],
        (false, true) => &[Letter::R2],
    };
    for &l in fix {
        cur = l.matrix().checked_mul(&cur)?;
    }
    // The fix letters are commuting involutions, so the inverse prefix is the same list.
    prefix.extend_from_slice(fix);
    let sanov = decompose_e(&cur)?;
    let mut letters = Vec::new();
    for l in prefix.iter().chain(sanov.word.letters()) {
        letters.extend_from_slice(rewrite_over_f0_f1_r1(*l));
    }
    if letters.len() > MAX_WORD_LEN {
        return Err(Error::InvalidInput(format!(
            "decomposition would exceed {MAX_WORD_LEN} letters"
        )));
    }
    finish(m, letters)
}

/// μ∘M − μ, with its divisibility by 4.
pub fn maslov_defect(m: &Mat2Z, mu: MaslovCovector) -> Result<MaslovDefect> {
    m.unimodular_det()?;
    let image = mu.compose(m)?;
    let defect = MaslovCovector::new(
        image.m1.checked_sub(mu.m1).ok_or(Error::Overflow)?,
        image.m2.checked_sub(mu.m2).ok_or(Error::Overflow)?,
    );
    Ok(MaslovDefect {
        defect,
        divisible_by_four: defect.divisible_by(4),
    })
}

/// A matrix g ∈ 𝒳 with (2 2)∘g = ν.
///
/// With ν = 2(m, n), m and n odd and coprime, solves a·n − c·m = 1 with
/// 0 ≤ a < |m| and returns (a, c; m−a, n−c). Its column sums are odd, which
/// places it in 𝒳.
pub fn match_maslov(nu: MaslovCovector) -> Result<Mat2Z> {
    if nu.m1.rem_euclid(4) != 2 || nu.m2.rem_euclid(4) != 2 {
        return Err(Error::InvalidInput(format!(
            "covector ({nu}) is not congruent to (2,2) mod 4"
        )));
    }
    if nu.m1.gcd(&nu.m2) != 2 {
        return Err(Error::InvalidInput(format!(
            "covector ({nu}) does not have divisibility two"
        )));
    }
    let (m, n) = (nu.m1 / 2, nu.m2 / 2);
    let eg = n.extended_gcd(&m);
    // eg.gcd = ±1 = x·n + y·m
    let inv_n = eg.x * eg.gcd;
    let a = inv_n.rem_euclid(m.abs());
    let an = a.checked_mul(n).ok_or(Error::Overflow)?;
    let c = (an - 1) / m;
    let g = Mat2Z::new(a, c, m - a, n - c);
    debug_assert_eq!(g.det(), Ok(1));
    Ok(g)
}
