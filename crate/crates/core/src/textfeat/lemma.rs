//! Rule-based English lemmatizer.
//!
//! Self-contained: an exception table for irregular forms, a pass-through
//! list for words that merely look inflected, and suffix rules for regular
//! plurals, past tenses and gerunds. Adverbs and comparatives are never
//! touched. The output is a pure function of the input string.

use std::collections::HashMap;
use std::sync::OnceLock;

const EXCEPTIONS: &[(&str, &str)] = &[
    // be / have / do / go
    ("is", "be"),
    ("are", "be"),
    ("was", "be"),
    ("were", "be"),
    ("been", "be"),
    ("being", "be"),
    ("am", "be"),
    ("has", "have"),
    ("had", "have"),
    ("having", "have"),
    ("does", "do"),
    ("did", "do"),
    ("done", "do"),
    ("doing", "do"),
    ("goes", "go"),
    ("going", "go"),
    ("went", "go"),
    ("gone", "go"),
    // irregular verbs
    ("came", "come"),
    ("made", "make"),
    ("said", "say"),
    ("says", "say"),
    ("found", "find"),
    ("got", "get"),
    ("gotten", "get"),
    ("took", "take"),
    ("taken", "take"),
    ("gave", "give"),
    ("given", "give"),
    ("knew", "know"),
    ("known", "know"),
    ("thought", "think"),
    ("saw", "see"),
    ("seen", "see"),
    ("wrote", "write"),
    ("written", "write"),
    ("led", "lead"),
    ("left", "leave"),
    ("meant", "mean"),
    ("brought", "bring"),
    ("bought", "buy"),
    ("built", "build"),
    ("chose", "choose"),
    ("chosen", "choose"),
    ("began", "begin"),
    ("begun", "begin"),
    ("felt", "feel"),
    ("kept", "keep"),
    ("held", "hold"),
    ("lost", "lose"),
    ("paid", "pay"),
    ("ran", "run"),
    ("sent", "send"),
    ("spent", "spend"),
    ("stood", "stand"),
    ("told", "tell"),
    ("understood", "understand"),
    ("won", "win"),
    ("drew", "draw"),
    ("drawn", "draw"),
    ("grew", "grow"),
    ("grown", "grow"),
    ("shown", "show"),
    ("fell", "fall"),
    ("fallen", "fall"),
    ("rose", "rise"),
    ("risen", "rise"),
    ("broke", "break"),
    ("broken", "break"),
    ("forgot", "forget"),
    ("forgotten", "forget"),
    ("became", "become"),
    ("overcame", "overcome"),
    ("used", "use"),
    ("using", "use"),
    ("uses", "use"),
    ("added", "add"),
    ("agreed", "agree"),
    ("created", "create"),
    ("creating", "create"),
    ("focused", "focus"),
    ("focusing", "focus"),
    ("died", "die"),
    ("dying", "die"),
    ("lying", "lie"),
    ("tying", "tie"),
    // irregular plurals
    ("men", "man"),
    ("women", "woman"),
    ("children", "child"),
    ("people", "person"),
    ("feet", "foot"),
    ("teeth", "tooth"),
    ("mice", "mouse"),
    ("indices", "index"),
    ("vertices", "vertex"),
    ("matrices", "matrix"),
    ("analyses", "analysis"),
    ("hypotheses", "hypothesis"),
    ("theses", "thesis"),
    ("parentheses", "parenthesis"),
    ("axes", "axis"),
    ("criteria", "criterion"),
    ("phenomena", "phenomenon"),
    ("radii", "radius"),
    ("ones", "one"),
];

/// Forms that end like inflections but are base words in their own right.
const PASS_THROUGH: &[&str] = &[
    // -s
    "always", "perhaps", "sometimes", "thus", "plus", "minus", "whereas", "besides", "towards",
    "afterwards", "nevertheless", "less", "unless", "across", "series", "species", "news",
    "yes", "this", "his", "its", "hers", "ours", "yours", "theirs", "as", "us", "was", "has",
    "is", "does", "goes", "gas", "bias", "atlas", "canvas", "lens", "means", "chaos", "christmas",
    "mathematics", "physics", "economics", "politics", "statistics", "ethics", "genetics",
    "dynamics", "mechanics", "thermodynamics", "electronics", "linguistics", "logistics",
    "analysis", "basis", "axis", "thesis", "hypothesis", "synthesis", "emphasis", "crisis",
    "diagnosis", "parenthesis", "ellipsis", "tennis", "chess", "else",
    "various", "nowadays", "overseas",
    // -ed
    "red", "bed", "hundred", "shed", "wed", "sacred", "naked", "wicked", "kindred", "embed",
    "indeed", "need", "speed", "seed", "feed", "proceed", "exceed", "succeed", "breed", "greed",
    // -ing
    "thing", "something", "nothing", "anything", "everything", "during", "string", "bring",
    "king", "ring", "sing", "spring", "morning", "evening", "ceiling", "wing", "swing", "sling",
    "sibling", "nothing", "interesting", "amazing", "boring",
];

fn exceptions() -> &'static HashMap<&'static str, &'static str> {
    static TABLE: OnceLock<HashMap<&'static str, &'static str>> = OnceLock::new();
    TABLE.get_or_init(|| EXCEPTIONS.iter().copied().collect())
}

fn pass_through(word: &str) -> bool {
    static SET: OnceLock<std::collections::HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| PASS_THROUGH.iter().copied().collect())
        .contains(word)
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn is_consonant_at(w: &[u8], i: usize) -> bool {
    match w[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => false,
        b'y' => i == 0 || !is_consonant_at(w, i - 1),
        _ => true,
    }
}

fn has_vowel(stem: &str) -> bool {
    let b = stem.as_bytes();
    (0..b.len()).any(|i| !is_consonant_at(b, i))
}

/// Number of vowel-consonant sequences (the Porter "measure").
fn measure(stem: &str) -> usize {
    let b = stem.as_bytes();
    let mut m = 0;
    let mut prev_vowel = false;
    for i in 0..b.len() {
        let vowel = !is_consonant_at(b, i);
        if prev_vowel && !vowel {
            m += 1;
        }
        prev_vowel = vowel;
    }
    m
}

fn ends_cvc(stem: &str) -> bool {
    let b = stem.as_bytes();
    let n = b.len();
    n >= 3
        && is_consonant_at(b, n - 3)
        && !is_consonant_at(b, n - 2)
        && is_consonant_at(b, n - 1)
        && !matches!(b[n - 1], b'w' | b'x' | b'y')
}

/// Repairs a stem left behind by stripping `-ed` or `-ing`.
fn restore_stem(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 2 && b[n - 1] == b[n - 2] && !is_vowel(b[n - 1]) && !matches!(b[n - 1], b'l' | b's' | b'z' | b'f') {
        return stem[..n - 1].to_string();
    }
    if needs_final_e(stem) {
        return format!("{stem}e");
    }
    stem.to_string()
}

fn needs_final_e(stem: &str) -> bool {
    let b = stem.as_bytes();
    let n = b.len();
    if n < 2 {
        return false;
    }
    let last = b[n - 1];
    let prev = b[n - 2];
    if matches!(last, b'v' | b'c') {
        return true;
    }
    if last == b'z' && !is_vowel(prev) {
        return false;
    }
    if last == b'z' {
        return true;
    }
    if last == b'g' && matches!(prev, b'r' | b'd') {
        return true;
    }
    if stem.ends_with("ang") && n >= 4 {
        return true;
    }
    if stem.ends_with("eas") || stem.ends_with("uir") {
        return true;
    }
    // consonant + vowel + consonant endings that usually carry a silent e
    if n >= 3 && !is_vowel(b[n - 3]) && b[n - 3] != b'y' {
        let tail = &stem[n - 2..];
        if matches!(tail, "at" | "ut" | "ir" | "in" | "us" | "os" | "ar" | "or" | "um" | "ur" | "id" | "od" | "ud" | "ib" | "ov") {
            return true;
        }
    }
    measure(stem) == 1 && ends_cvc(stem)
}

/// Maps a lowercase token to its lemma.
pub fn lemmatize(token: &str) -> String {
    if let Some(lemma) = exceptions().get(token) {
        return (*lemma).to_string();
    }
    if pass_through(token) || !token.is_ascii() {
        return token.to_string();
    }
    let n = token.len();

    // plurals and third person singular
    if token.ends_with("ies") && n > 3 {
        return if n > 4 {
            format!("{}y", &token[..n - 3])
        } else {
            format!("{}ie", &token[..n - 3])
        };
    }
    if token.ends_with("sses") {
        return token[..n - 2].to_string();
    }
    if n > 4
        && (token.ends_with("xes") || token.ends_with("ches") || token.ends_with("shes") || token.ends_with("zzes"))
    {
        return token[..n - 2].to_string();
    }
    if token.ends_with('s')
        && n > 3
        && !token.ends_with("ss")
        && !token.ends_with("us")
        && !token.ends_with("is")
        && !token.ends_with("ous")
        && !token.ends_with("ics")
    {
        return token[..n - 1].to_string();
    }

    // past tense / participle
    if token.ends_with("ied") && n > 3 {
        return if n > 4 {
            format!("{}y", &token[..n - 3])
        } else {
            format!("{}ie", &token[..n - 3])
        };
    }
    if token.ends_with("eed") {
        return token.to_string();
    }
    if token.ends_with("ed") && n > 4 {
        let stem = &token[..n - 2];
        if has_vowel(stem) {
            return restore_stem(stem);
        }
    }

    // gerund
    if token.ends_with("ing") && n > 5 {
        let stem = &token[..n - 3];
        if has_vowel(stem) {
            return restore_stem(stem);
        }
    }

    token.to_string()
}
