/// Lowercased alphabetic runs. Every non-alphabetic character (digits,
/// apostrophes, punctuation, whitespace) separates tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Number of word tokens in a trace.
pub fn cot_length(cot: &str) -> usize {
    cot.split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .count()
}

/// Splits on `.`, `!` or `?` followed by whitespace (or end of text) and on
/// blank lines. Returned sentences are trimmed and never empty.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut current = String::new();
    let mut i = 0;

    let flush = |buf: &mut String, out: &mut Vec<String>| {
        let s = buf.trim();
        if !s.is_empty() {
            out.push(s.to_string());
        }
        buf.clear();
    };

    while i < chars.len() {
        let c = chars[i];
        match c {
            '.' | '!' | '?' => {
                current.push(c);
                if chars.get(i + 1).is_none_or(|n| n.is_whitespace()) {
                    flush(&mut current, &mut out);
                }
                i += 1;
            }
            '\n' => {
                // a blank line is a newline, optional horizontal space, newline
                let mut j = i + 1;
                while j < chars.len() && chars[j] != '\n' && chars[j].is_whitespace() {
                    j += 1;
                }
                if j < chars.len() && chars[j] == '\n' {
                    flush(&mut current, &mut out);
                    i = j + 1;
                } else {
                    current.push(c);
                    i += 1;
                }
            }
            _ => {
                current.push(c);
                i += 1;
            }
        }
    }
    flush(&mut current, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apostrophes_and_digits_split() {
        assert_eq!(tokenize("Don't guess!"), ["don", "t", "guess"]);
        assert_eq!(tokenize("So x=2, so..."), ["so", "x", "so"]);
        assert_eq!(tokenize("abc123def"), ["abc", "def"]);
        assert!(tokenize("").is_empty());
        assert!(tokenize("42 + 7 = 49").is_empty());
    }

    #[test]
    fn length_counts_tokens() {
        assert_eq!(cot_length("a b c"), 3);
        assert_eq!(cot_length(""), 0);
        let t = "Let's see: 3 apples, don't forget.";
        assert_eq!(cot_length(t), tokenize(t).len());
    }

    #[test]
    fn sentence_boundaries() {
        assert_eq!(split_sentences("A. B? C!"), ["A.", "B?", "C!"]);
        assert_eq!(split_sentences("no terminal punctuation here"), ["no terminal punctuation here"]);
        assert_eq!(split_sentences("Step 1.\n\nStep 2"), ["Step 1.", "Step 2"]);
        assert_eq!(split_sentences("First part\n  \nsecond part"), ["First part", "second part"]);
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("  \n\n ").is_empty());
    }

    #[test]
    fn decimals_do_not_split() {
        assert_eq!(split_sentences("x is 3.14 here. Done"), ["x is 3.14 here.", "Done"]);
        assert_eq!(split_sentences("Wait...what? Ok"), ["Wait...what?", "Ok"]);
    }

    #[test]
    fn single_newline_is_not_a_boundary() {
        assert_eq!(split_sentences("one\ntwo"), ["one\ntwo"]);
    }
}
