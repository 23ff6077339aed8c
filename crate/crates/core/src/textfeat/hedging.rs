use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::tokenize::{split_sentences, tokenize};
use crate::error::{Error, Result};

const DEFAULT_WORDS: &[&str] = &[
    // modal and uncertainty verbs
    "might", "may", "could", "should", "would", "seems", "suggests", "appears",
    // uncertainty adverbs
    "possibly", "perhaps", "likely", "unlikely", "probably", "generally", "usually", "sometimes",
    "often", "tends", "somewhat", "rather", "quite", "almost", "nearly", "virtually",
    "presumably", "arguably", "relatively", "fairly", "reasonably", "mostly", "partially",
    "mainly", "primarily", "essentially", "basically",
];

const DEFAULT_PHRASES: &[&str] = &[
    "it seems that",
    "it appears that",
    "it suggests that",
    "it is possible that",
    "it is likely that",
    "in part",
    "to some extent",
];

/// Single-word hedges and multi-word hedging phrases.
///
/// Phrases are stored as token sequences produced by [`tokenize`], so they
/// match on the token stream of a sentence rather than on raw characters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HedgingLexicon {
    pub single_words: BTreeSet<String>,
    pub phrases: Vec<Vec<String>>,
}

impl Default for HedgingLexicon {
    fn default() -> Self {
        let mut lex = HedgingLexicon::empty();
        for w in DEFAULT_WORDS.iter().chain(DEFAULT_PHRASES) {
            lex.insert(w).expect("built-in entries are valid");
        }
        lex
    }
}

impl HedgingLexicon {
    pub fn empty() -> Self {
        HedgingLexicon {
            single_words: BTreeSet::new(),
            phrases: Vec::new(),
        }
    }

    /// Adds one entry; entries with several tokens become phrases.
    pub fn insert(&mut self, entry: &str) -> Result<()> {
        let tokens = tokenize(entry);
        match tokens.len() {
            0 => Err(Error::invalid(format!("hedging entry {entry:?} has no word tokens"))),
            1 => {
                self.single_words.insert(tokens.into_iter().next().unwrap());
                Ok(())
            }
            _ => {
                if !self.phrases.contains(&tokens) {
                    self.phrases.push(tokens);
                }
                Ok(())
            }
        }
    }

    /// Parses an override file: one entry per line, blank lines ignored.
    pub fn from_lines(text: &str) -> Result<Self> {
        let mut lex = HedgingLexicon::empty();
        for line in text.lines() {
            if line.trim().is_empty() {
                continue;
            }
            lex.insert(line)?;
        }
        Ok(lex)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_lines(&text)
    }

    pub fn is_empty(&self) -> bool {
        self.single_words.is_empty() && self.phrases.is_empty()
    }

    pub fn len(&self) -> usize {
        self.single_words.len() + self.phrases.len()
    }
}

/// True when the token sequence contains a hedge word or a contiguous
/// hedging phrase.
pub fn sentence_has_hedge(tokens: &[String], lexicon: &HedgingLexicon) -> bool {
    if tokens.iter().any(|t| lexicon.single_words.contains(t)) {
        return true;
    }
    lexicon
        .phrases
        .iter()
        .any(|p| !p.is_empty() && tokens.windows(p.len()).any(|w| w == p.as_slice()))
}

/// Fraction of sentences that contain at least one hedging expression.
pub fn hedging_rate(cot: &str, lexicon: &HedgingLexicon) -> Result<f64> {
    let sentences = split_sentences(cot);
    if sentences.is_empty() {
        return Err(Error::invalid("text has no sentences"));
    }
    let hedged = sentences
        .iter()
        .filter(|s| sentence_has_hedge(&tokenize(s), lexicon))
        .count();
    Ok(hedged as f64 / sentences.len() as f64)
}

/// Reference implementation: scans every lexicon entry against every
/// sentence, rebuilding phrase text by joining tokens with single spaces.
pub fn naive_hedging_rate(cot: &str, lexicon: &HedgingLexicon) -> Result<f64> {
    let sentences = split_sentences(cot);
    if sentences.is_empty() {
        return Err(Error::invalid("text has no sentences"));
    }
    let mut hedged = 0usize;
    for s in &sentences {
        let joined = format!(" {} ", tokenize(s).join(" "));
        let mut hit = false;
        for w in &lexicon.single_words {
            if joined.contains(&format!(" {w} ")) {
                hit = true;
            }
        }
        for p in &lexicon.phrases {
            if joined.contains(&format!(" {} ", p.join(" "))) {
                hit = true;
            }
        }
        if hit {
            hedged += 1;
        }
    }
    Ok(hedged as f64 / sentences.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_lexicon_contents() {
        let lex = HedgingLexicon::default();
        assert_eq!(lex.single_words.len(), 35);
        assert_eq!(lex.phrases.len(), 7);
        assert!(lex.single_words.contains("might"));
        assert!(lex.single_words.contains("basically"));
        assert!(lex.phrases.contains(&vec!["to".into(), "some".into(), "extent".into()]));
    }

    #[test]
    fn rate_examples() {
        let lex = HedgingLexicon::default();
        let r = hedging_rate("It seems that x is 2. Therefore x is 2.", &lex).unwrap();
        assert_eq!(r, 0.5);
        assert_eq!(hedging_rate("This might possibly work.", &lex).unwrap(), 1.0);
    }

    #[test]
    fn ten_sentences_three_hedged() {
        let lex = HedgingLexicon::default();
        let sentences = [
            "We start with the equation.",
            "This is perhaps the key step.",
            "Next we expand both sides.",
            "Collect the terms.",
            "It is likely that the root is real.",
            "Divide by two.",
            "The answer could be negative.",
            "Check the sign.",
            "Substitute back.",
            "Done.",
        ];
        let text = sentences.join(" ");
        let oracle = sentences
            .iter()
            .filter(|s| s.contains("perhaps") || s.contains("It is likely that") || s.contains("could"))
            .count() as f64
            / 10.0;
        assert_eq!(oracle, 0.3);
        assert_eq!(hedging_rate(&text, &lex).unwrap(), oracle);
    }

    #[test]
    fn case_insensitive_and_whole_token() {
        let lex = HedgingLexicon::default();
        assert_eq!(hedging_rate("MIGHT be.", &lex).unwrap(), 1.0);
        // "mayor" is not "may"
        assert_eq!(hedging_rate("The mayor spoke.", &lex).unwrap(), 0.0);
    }

    #[test]
    fn phrase_matching_is_token_based() {
        let lex = HedgingLexicon::from_lines("in part").unwrap();
        // tokenization removes the comma so the phrase still matches
        assert_eq!(hedging_rate("in, part.", &lex).unwrap(), 1.0);
        // a sentence boundary between the words does break it
        assert_eq!(hedging_rate("We are in. Part two.", &lex).unwrap(), 0.0);
    }

    #[test]
    fn empty_text_is_an_error() {
        assert!(hedging_rate("", &HedgingLexicon::default()).is_err());
        assert!(hedging_rate("   ", &HedgingLexicon::default()).is_err());
    }

    #[test]
    fn override_file_parsing() {
        let lex = HedgingLexicon::from_lines("maybe\n\nI think\n").unwrap();
        assert_eq!(lex.single_words.len(), 1);
        assert_eq!(lex.phrases, vec![vec!["i".to_string(), "think".to_string()]]);
        assert!(HedgingLexicon::from_lines("123\n").is_err());
    }

    fn text_strategy() -> impl Strategy<Value = String> {
        let words = prop::sample::select(vec![
            "might", "it", "seems", "that", "x", "is", "in", "part", "to", "some", "extent", "so",
            "Perhaps", "the", "answer", "may", "be", "2", ".", "!", "?", "\n\n", ",", "likely",
        ]);
        prop::collection::vec(words, 1..60).prop_map(|ws| ws.join(" "))
    }

    proptest! {
        #[test]
        fn matches_naive_scan(text in text_strategy()) {
            let lex = HedgingLexicon::default();
            let fast = hedging_rate(&text, &lex);
            let slow = naive_hedging_rate(&text, &lex);
            match (fast, slow) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "disagreement on error"),
            }
        }

        #[test]
        fn empty_lexicon_gives_zero(text in text_strategy()) {
            if let Ok(r) = hedging_rate(&text, &HedgingLexicon::empty()) {
                prop_assert_eq!(r, 0.0);
            }
        }

        #[test]
        fn rate_in_unit_interval(text in text_strategy()) {
            if let Ok(r) = hedging_rate(&text, &HedgingLexicon::default()) {
                prop_assert!((0.0..=1.0).contains(&r));
            }
        }
    }
}
