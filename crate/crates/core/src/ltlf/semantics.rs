use super::formula::{Alphabet, Formula, Letter};
use crate::error::{Error, Result};

/// Finite-trace satisfaction by direct recursion over positions.
///
/// This is the reference the automaton construction is tested against; it
/// deliberately shares no code with progression. `X` is the strong next.
pub fn eval_word(f: &Formula, ap: &Alphabet, word: &[Letter]) -> Result<bool> {
    if word.is_empty() {
        return Err(Error::EmptyWord);
    }
    f.check_atoms(ap)?;
    Ok(holds(f, ap, word, 0))
}

fn holds(f: &Formula, ap: &Alphabet, w: &[Letter], i: usize) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(p) => w[i].contains(ap.index_of(p).expect("checked atom")),
        Formula::Not(g) => !holds(g, ap, w, i),
        Formula::And(g, h) => holds(g, ap, w, i) && holds(h, ap, w, i),
        Formula::Or(g, h) => holds(g, ap, w, i) || holds(h, ap, w, i),
        Formula::Next(g) => i + 1 < w.len() && holds(g, ap, w, i + 1),
        Formula::Until(g, h) => {
            for j in i..w.len() {
                if holds(h, ap, w, j) {
                    return true;
                }
                if !holds(g, ap, w, j) {
                    return false;
                }
            }
            false
        }
        Formula::Eventually(g) => (i..w.len()).any(|j| holds(g, ap, w, j)),
        Formula::Always(g) => (i..w.len()).all(|j| holds(g, ap, w, j)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltlf::parse_ltlf;

    fn check(src: &str, word: &[&[&str]]) -> bool {
        let ap = Alphabet::new(["p", "o"]);
        let f = parse_ltlf(src, Some(&ap)).unwrap();
        let w: Vec<Letter> = word.iter().map(|l| ap.letter(l.iter()).unwrap()).collect();
        eval_word(&f, &ap, &w).unwrap()
    }

    #[test]
    fn examples() {
        assert!(check("F p", &[&["p"], &[]]));
        assert!(!check("X p", &[&["p"]]));
        assert!(!check("G !o", &[&[], &["o"]]));
        assert!(check("X p", &[&[], &["p"]]));
        assert!(check("!o U p", &[&[], &[], &["p", "o"]]));
        assert!(!check("!o U p", &[&[], &["o"], &["p"]]));
    }

    #[test]
    fn derived_operators_agree_with_expansion() {
        let ap = Alphabet::new(["p", "o"]);
        for src in ["F p", "G p", "G F o", "F (p & X o)"] {
            let f = parse_ltlf(src, Some(&ap)).unwrap();
            let g = f.expand_derived();
            for len in 1..=4 {
                for code in 0..(4usize.pow(len)) {
                    let w: Vec<Letter> = (0..len).map(|k| Letter(((code >> (2 * k)) & 3) as u32)).collect();
                    assert_eq!(eval_word(&f, &ap, &w).unwrap(), eval_word(&g, &ap, &w).unwrap());
                }
            }
        }
    }

    #[test]
    fn empty_word_rejected() {
        let ap = Alphabet::new(["p"]);
        assert_eq!(eval_word(&Formula::True, &ap, &[]), Err(Error::EmptyWord));
    }
}
