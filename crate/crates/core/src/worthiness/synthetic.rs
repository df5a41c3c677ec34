use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::WorthinessLabel;

const SUBJECTS: &[&str] = &[
    "unemployment",
    "violent crime",
    "the deficit",
    "inflation",
    "exports",
    "average wages",
    "student debt",
    "college enrollment",
    "carbon emissions",
    "the tax burden",
    "gas prices",
    "the uninsured rate",
    "manufacturing output",
    "home prices",
];
const MOVES: &[&str] = &[
    "rose",
    "fell",
    "doubled",
    "increased by",
    "decreased by",
    "dropped",
    "grew",
    "tripled",
    "shrank",
];
const UNITS: &[&str] = &["percent", "million dollars", "billion dollars", "points"];
const PERIODS: &[&str] = &[
    "last year",
    "since 2010",
    "in 2019",
    "over the past decade",
    "under the current governor",
    "between 2008 and 2016",
    "in the first quarter",
];

const OPENERS: &[&str] = &["", "well, ", "honestly, ", "listen, ", "folks, ", "you know, "];
const REMARKS: &[&str] = &[
    "thank you all for coming out tonight",
    "what a wonderful crowd we have here",
    "i think we need to keep talking about the future",
    "let me be clear about how i feel",
    "we will see what happens next",
    "i love this great community",
    "are you ready for real change",
    "my opponent and i simply disagree",
    "that is a great question",
    "i want to thank my family",
    "let us get to work together",
    "nobody cares more about you than i do",
];
const ENDINGS: &[&str] = &[".", "!", "?"];

/// Deterministic labelled sentences: statistical assertions versus
/// rhetorical remarks. Roughly balanced; `n` rows in total.
pub fn synthetic_corpus(n: usize, seed: u64) -> Vec<(String, WorthinessLabel)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            if i % 2 == 0 {
                (claim_sentence(&mut rng), WorthinessLabel::Claim)
            } else {
                (remark_sentence(&mut rng), WorthinessLabel::NonClaim)
            }
        })
        .collect()
}

fn pick<'a, R: Rng>(rng: &mut R, items: &[&'a str]) -> &'a str {
    items.choose(rng).expect("non-empty word list")
}

fn capitalise(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn claim_sentence<R: Rng>(rng: &mut R) -> String {
    let amount = rng.gen_range(2..=95);
    capitalise(&format!(
        "{} {} {} {} {}.",
        pick(rng, SUBJECTS),
        pick(rng, MOVES),
        amount,
        pick(rng, UNITS),
        pick(rng, PERIODS)
    ))
}

fn remark_sentence<R: Rng>(rng: &mut R) -> String {
    capitalise(&format!(
        "{}{}{}",
        pick(rng, OPENERS),
        pick(rng, REMARKS),
        pick(rng, ENDINGS)
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_balanced() {
        let a = synthetic_corpus(20, 7);
        assert_eq!(a, synthetic_corpus(20, 7));
        assert_ne!(a, synthetic_corpus(20, 8));
        let claims = a.iter().filter(|(_, l)| *l == WorthinessLabel::Claim).count();
        assert_eq!(claims, 10);
        assert!(a.iter().all(|(s, _)| !s.contains('\t')));
    }
}
