//! Words in free groups, used as homotopy classes of loops on punctured surfaces.
//!
//! Letter `±(i + 1)` stands for generator `i` or its inverse.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Free reduction.
pub fn free_reduce(letters: &[i32]) -> Vec<i32> {
    let mut out: Vec<i32> = Vec::with_capacity(letters.len());
    for &x in letters {
        if out.last() == Some(&-x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

/// Free reduction followed by removal of cancelling first/last letters.
pub fn cyclic_reduce(letters: &[i32]) -> Vec<i32> {
    let w = free_reduce(letters);
    let mut lo = 0;
    let mut hi = w.len();
    while hi - lo >= 2 && w[lo] == -w[hi - 1] {
        lo += 1;
        hi -= 1;
    }
    w[lo..hi].to_vec()
}

pub fn inverse(letters: &[i32]) -> Vec<i32> {
    letters.iter().rev().map(|x| -x).collect()
}

fn is_rotation_of(w: &[i32], target: &[i32]) -> bool {
    w.len() == target.len() && (0..w.len()).any(|s| w[s..].iter().chain(&w[..s]).eq(target.iter()))
}

/// Whether the cyclically reduced word `w` is conjugate to `p^n` for some `n ≠ 0`.
pub fn is_conjugate_to_power(w: &[i32], p: &[i32]) -> bool {
    let p = cyclic_reduce(p);
    if w.is_empty() || p.is_empty() || !w.len().is_multiple_of(p.len()) {
        return false;
    }
    let n = w.len() / p.len();
    let pow: Vec<i32> = p.iter().copied().cycle().take(n * p.len()).collect();
    is_rotation_of(w, &pow) || is_rotation_of(w, &inverse(&pow))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HomotopyWord {
    letters: Vec<i32>,
    rank: usize,
}

impl HomotopyWord {
    /// Cyclically reduces `letters`. Panics on a letter outside the rank.
    pub fn new(letters: &[i32], rank: usize) -> HomotopyWord {
        assert!(
            letters.iter().all(|&x| x != 0 && x.unsigned_abs() as usize <= rank),
            "letter out of range for rank {rank}"
        );
        HomotopyWord { letters: cyclic_reduce(letters), rank }
    }

    pub fn trivial(rank: usize) -> HomotopyWord {
        HomotopyWord { letters: Vec::new(), rank }
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// The implicit last puncture generator `(a1⋯a_rank)^{-1}`.
    pub fn last_generator(rank: usize) -> Vec<i32> {
        (1..=rank as i32).rev().map(|x| -x).collect()
    }
}

impl fmt::Display for HomotopyWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        let mut i = 0;
        while i < self.letters.len() {
            let x = self.letters[i];
            let mut run = 1;
            while i + run < self.letters.len() && self.letters[i + run] == x {
                run += 1;
            }
            if !first {
                write!(f, " ")?;
            }
            first = false;
            let exp = if x < 0 { -(run as i64) } else { run as i64 };
            if exp == 1 {
                write!(f, "a{}", x.abs())?;
            } else {
                write!(f, "a{}^{}", x.abs(), exp)?;
            }
            i += run;
        }
        Ok(())
    }
}

/// Admissibility on the sphere with `rank + 1` punctures whose puncture loops
/// are the generators and their product inverse.
pub fn is_admissible(w: &HomotopyWord) -> bool {
    let mut peripherals: Vec<Vec<i32>> = (1..=w.rank as i32).map(|i| vec![i]).collect();
    peripherals.push(HomotopyWord::last_generator(w.rank));
    is_admissible_in(w, &peripherals)
}

/// A loop is admissible unless it is trivial or conjugate to a power of one
/// of the given puncture loops.
pub fn is_admissible_in(w: &HomotopyWord, peripherals: &[Vec<i32>]) -> bool {
    !w.is_empty() && !peripherals.iter().any(|p| is_conjugate_to_power(&w.letters, p))
}
