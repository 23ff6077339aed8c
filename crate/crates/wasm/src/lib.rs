//! Three browser-facing operations. Each takes plain strings or numbers and
//! returns a JSON document; the `*_json` functions hold the logic so they
//! can be tested natively.

use cot_signal::corpus::{CotRecord, Grade};
use cot_signal::heuristics::{harmful_word_rule, parse_word_list, HeuristicConfig, DEFAULT_HARMFUL_WORDS};
use cot_signal::lexicon::PUBLISHED_HARMFUL_WORDS;
use cot_signal::metrics::{calibration_error, mcc, ConfusionMatrix};
use cot_signal::textfeat::{cot_length, sentence_has_hedge, split_sentences, tokenize, HedgingLexicon};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Surface features of one trace plus the harmful-word rule's verdict.
/// `harmful_words` is one token per line; blank means the default list.
pub fn analyze_cot_json(text: &str, harmful_words: &str) -> Result<String, String> {
    let words = if harmful_words.trim().is_empty() {
        DEFAULT_HARMFUL_WORDS.iter().map(|s| s.to_string()).collect()
    } else {
        parse_word_list(harmful_words).map_err(|e| e.to_string())?
    };
    let lex = HedgingLexicon::default();
    let sentences = split_sentences(text);
    let hedged: Vec<usize> = sentences
        .iter()
        .enumerate()
        .filter(|(_, s)| sentence_has_hedge(&tokenize(s), &lex))
        .map(|(i, _)| i)
        .collect();
    let tokens = tokenize(text);
    let count = |w: &str| tokens.iter().filter(|t| *t == w).count();
    let hits: Vec<_> = words.iter().filter(|w| count(w) > 0).map(|w| json!({"word": w, "count": count(w)})).collect();
    let published: Vec<_> = PUBLISHED_HARMFUL_WORDS.iter().filter(|w| count(w) > 0).map(|w| json!({"word": w, "count": count(w)})).collect();

    let record = CotRecord::new("demo", "demo", "demo", text, "", 50.0, Grade::Correct);
    let cfg = HeuristicConfig { harmful_words: words.clone(), rng_seed: 0 };
    let predicted_correct = harmful_word_rule(&record, &cfg).map_err(|e| e.to_string())?;

    Ok(json!({
        "length_words": cot_length(text),
        "sentences": sentences.len(),
        "hedged_sentences": hedged,
        "hedging_rate": if sentences.is_empty() { 0.0 } else { hedged.len() as f64 / sentences.len() as f64 },
        "harmful_words": words,
        "harmful_hits": hits,
        "published_list_hits": published,
        "word_rule_prediction": if predicted_correct { "correct" } else { "incorrect" },
    })
    .to_string())
}

/// Calibration report from lines of `confidence,correct` (confidence in
/// percent, correct as 1/0 or true/false). Lines starting with `#` and a
/// non-numeric header line are skipped.
pub fn calibration_json(csv: &str) -> Result<String, String> {
    let mut recs = Vec::new();
    for (n, line) in csv.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split([',', '\t', ';']).map(str::trim);
        let (Some(c), Some(y)) = (parts.next(), parts.next()) else {
            return Err(format!("line {}: expected confidence,correct", n + 1));
        };
        let conf: f64 = match c.parse() {
            Ok(v) => v,
            Err(_) if recs.is_empty() && n == 0 => continue,
            Err(_) => return Err(format!("line {}: bad confidence {c:?}", n + 1)),
        };
        let correct = match y.to_ascii_lowercase().as_str() {
            "1" | "true" | "correct" | "yes" => true,
            "0" | "false" | "incorrect" | "no" => false,
            other => return Err(format!("line {}: bad label {other:?}", n + 1)),
        };
        if !(0.0..=100.0).contains(&conf) {
            return Err(format!("line {}: confidence {conf} outside 0-100", n + 1));
        }
        recs.push((conf, correct));
    }
    let report = calibration_error(&recs).map_err(|e| e.to_string())?;
    Ok(json!({"records": recs.len(), "report": report}).to_string())
}

/// MCC and friends for a confusion matrix; "positive" means predicted correct.
pub fn confusion_json(tn: u32, fp: u32, fn_: u32, tp: u32) -> Result<String, String> {
    let cm = ConfusionMatrix::new(tn.into(), fp.into(), fn_.into(), tp.into());
    if cm.total() == 0 {
        return Err("confusion matrix is empty".into());
    }
    let ratio = |a: u32, b: u32| if a + b == 0 { None } else { Some(f64::from(a) / f64::from(a + b)) };
    Ok(json!({
        "mcc": mcc(&cm),
        "accuracy": cm.accuracy(),
        "precision": ratio(tp, fp),
        "recall": ratio(tp, fn_),
        "specificity": ratio(tn, fp),
        "total": cm.total(),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn analyze_cot(text: &str, harmful_words: &str) -> Result<String, JsValue> {
    analyze_cot_json(text, harmful_words).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn calibration(csv: &str) -> Result<String, JsValue> {
    calibration_json(csv).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn confusion_metrics(tn: u32, fp: u32, fn_: u32, tp: u32) -> Result<String, JsValue> {
    confusion_json(tn, fp, fn_, tp).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: Result<String, String>) -> Value {
        serde_json::from_str(&s.unwrap()).unwrap()
    }

    #[test]
    fn analyze_flags_words_and_hedges() {
        let v = parse(analyze_cot_json("This is hard. Perhaps the answer is 4. It is 4.", ""));
        assert_eq!(v["sentences"], 3);
        assert_eq!(v["hedged_sentences"], json!([1]));
        assert_eq!(v["harmful_hits"][0]["word"], "hard");
        assert_eq!(v["word_rule_prediction"], "incorrect");
        let v = parse(analyze_cot_json("Compute directly. Done.", "stuck\n"));
        assert_eq!(v["word_rule_prediction"], "correct");
        assert_eq!(v["length_words"], 3);
    }

    #[test]
    fn calibration_parses_text() {
        let v = parse(calibration_json("confidence,correct\n100,1\n100,true\n# note\n"));
        assert_eq!(v["report"]["calibration_error_pct"], 0.0);
        assert!(calibration_json("50,maybe").is_err());
        assert!(calibration_json("150,1").is_err());
        assert!(calibration_json("").is_err());
    }

    #[test]
    fn confusion_matches_core() {
        let v = parse(confusion_json(40, 30, 24, 46));
        assert!((v["mcc"].as_f64().unwrap() - 0.229).abs() < 5e-4);
        assert!(confusion_json(0, 0, 0, 0).is_err());
        assert_eq!(parse(confusion_json(5, 0, 0, 0))["precision"], Value::Null);
    }
}
