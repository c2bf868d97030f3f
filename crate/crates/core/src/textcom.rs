//! Textual complexity of the main text: 32 features.
//!
//! Sentences are split on tokens ending in `.`, `!` or `?` (ignoring
//! trailing quotes and brackets) and never span paragraphs. A word is a
//! whitespace token with at least one alphanumeric character, stripped of
//! surrounding punctuation and lowercased. Characters are the alphanumeric
//! characters of words.

use std::collections::BTreeSet;

use crate::features::FeatureVector;
use crate::main_text::MainText;

pub const PREFIX: &str = "texcom.";

pub const FEATURES: [&str; 32] = [
    "flesch_reading_ease",
    "flesch_kincaid_grade",
    "automated_readability_index",
    "coleman_liau_index",
    "gunning_fog",
    "lix",
    "smog",
    "n_chars",
    "n_syllables",
    "n_words",
    "n_sentences",
    "n_paragraphs",
    "avg_word_length",
    "avg_sentence_length_words",
    "avg_sentence_length_chars",
    "n_long_words",
    "n_complex_words",
    "type_token_ratio",
    "min_sentence_length",
    "max_sentence_length",
    "n_tobe_verbs",
    "n_auxiliary_verbs",
    "n_conjunctions",
    "n_pronouns",
    "n_prepositions",
    "n_nominalizations",
    "begin_pronoun",
    "begin_interrogative",
    "begin_article",
    "begin_subordination",
    "begin_conjunction",
    "begin_preposition",
];

pub const LONG_WORD_CHARS: usize = 7;
pub const COMPLEX_WORD_SYLLABLES: usize = 3;

pub const TOBE_VERBS: &[&str] = &["am", "is", "are", "was", "were", "be", "been", "being"];
pub const AUXILIARY_VERBS: &[&str] = &[
    "will", "would", "shall", "should", "can", "could", "may", "might", "must", "do", "does",
    "did", "have", "has", "had",
];
pub const CONJUNCTIONS: &[&str] = &["and", "but", "or", "nor", "yet", "so"];
pub const PRONOUNS: &[&str] = &[
    "i", "me", "my", "mine", "myself", "you", "your", "yours", "yourself", "he", "him", "his",
    "himself", "she", "her", "hers", "herself", "it", "its", "itself", "we", "us", "our", "ours",
    "ourselves", "they", "them", "their", "theirs", "themselves",
];
pub const PREPOSITIONS: &[&str] = &[
    "about", "above", "across", "against", "along", "among", "around", "at", "behind", "below",
    "beneath", "beside", "between", "beyond", "by", "despite", "down", "during", "except",
    "for", "from", "in", "inside", "into", "near", "of", "off", "on", "onto", "out", "outside",
    "over", "past", "through", "throughout", "to", "toward", "towards", "under", "underneath",
    "up", "upon", "with", "within", "without",
];
pub const INTERROGATIVES: &[&str] = &["what", "when", "where", "which", "who", "whom", "whose", "why", "how"];
pub const ARTICLES: &[&str] = &["a", "an", "the"];
pub const SUBORDINATORS: &[&str] = &[
    "after", "although", "as", "because", "before", "if", "once", "since", "though", "unless",
    "until", "whenever", "whereas", "wherever", "while",
];
pub const NOMINAL_SUFFIXES: &[&str] = &["tion", "sion", "ment", "ness", "ity", "ance", "ence", "ism"];

const SYLLABLE_EXCEPTIONS: &[(&str, usize)] = &[
    ("area", 3),
    ("being", 2),
    ("business", 2),
    ("create", 2),
    ("created", 3),
    ("every", 2),
    ("idea", 3),
    ("people", 2),
    ("poem", 2),
    ("quiet", 2),
    ("science", 2),
    ("toward", 2),
];

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u' | b'y')
}

/// Vowel-group syllable count with silent-e and `-ed`/`-es` suppression.
///
/// Words of up to three letters, and words without letters, count one.
pub fn count_syllables(word: &str) -> usize {
    let w: Vec<u8> = word
        .bytes()
        .filter(u8::is_ascii_alphabetic)
        .map(|b| b.to_ascii_lowercase())
        .collect();
    if w.len() <= 3 {
        return 1;
    }
    if let Some(&(_, n)) = SYLLABLE_EXCEPTIONS
        .iter()
        .find(|(e, _)| e.as_bytes() == w.as_slice())
    {
        return n;
    }
    let mut groups = 0usize;
    let mut prev_vowel = false;
    for &c in &w {
        let v = is_vowel(c);
        if v && !prev_vowel {
            groups += 1;
        }
        prev_vowel = v;
    }
    let n = w.len();
    let (last, prev, before) = (w[n - 1], w[n - 2], w[n - 3]);
    let silent = if last == b'e' {
        !is_vowel(prev) && !(prev == b'l' && !is_vowel(before))
    } else if prev == b'e' && last == b'd' {
        !is_vowel(before) && !matches!(before, b't' | b'd')
    } else if prev == b'e' && last == b's' {
        !is_vowel(before) && !matches!(before, b's' | b'x' | b'z' | b'c' | b'g' | b'h')
    } else {
        false
    };
    if silent {
        groups = groups.saturating_sub(1);
    }
    groups.max(1)
}

fn strip_word(tok: &str) -> String {
    tok.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase()
}

fn ends_sentence(tok: &str) -> bool {
    tok.trim_end_matches(|c: char| matches!(c, '"' | '\'' | ')' | ']' | '”' | '’'))
        .ends_with(['.', '!', '?'])
}

/// Sentences of a paragraph as lists of normalized words.
pub fn sentences(paragraph: &str) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for tok in paragraph.split_whitespace() {
        if tok.chars().any(char::is_alphanumeric) {
            cur.push(strip_word(tok));
        }
        if ends_sentence(tok) && !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn in_list(list: &[&str], w: &str) -> bool {
    list.contains(&w)
}

fn is_nominalization(w: &str) -> bool {
    w.chars().count() >= LONG_WORD_CHARS && NOMINAL_SUFFIXES.iter().any(|s| w.ends_with(s))
}

pub fn feature_names() -> Vec<String> {
    FEATURES.iter().map(|f| format!("{PREFIX}{f}")).collect()
}

pub fn textcom_features(t: &MainText) -> FeatureVector {
    let sents: Vec<Vec<String>> = t.paragraphs.iter().flat_map(|p| sentences(p)).collect();
    let words: Vec<&String> = sents.iter().flatten().collect();
    if words.is_empty() {
        return FeatureVector::page(feature_names(), vec![0.0; 32]);
    }

    let n_words = words.len() as f64;
    let n_sent = sents.len() as f64;
    let n_par = t.paragraphs.len() as f64;
    let chars: usize = words
        .iter()
        .map(|w| w.chars().filter(|c| c.is_alphanumeric()).count())
        .sum();
    let syll: Vec<usize> = words.iter().map(|w| count_syllables(w)).collect();
    let n_syll = syll.iter().sum::<usize>() as f64;
    let long = words.iter().filter(|w| w.chars().count() >= LONG_WORD_CHARS).count() as f64;
    let complex = syll.iter().filter(|&&s| s >= COMPLEX_WORD_SYLLABLES).count() as f64;
    let types: BTreeSet<&String> = words.iter().copied().collect();
    let lens = sents.iter().map(Vec::len);
    let min_len = lens.clone().min().unwrap_or(0) as f64;
    let max_len = lens.max().unwrap_or(0) as f64;
    let c = chars as f64;

    let wps = n_words / n_sent;
    let spw = n_syll / n_words;
    let count = |list: &[&str]| words.iter().filter(|w| in_list(list, w)).count() as f64;
    let begins = |list: &[&str]| sents.iter().filter(|s| in_list(list, &s[0])).count() as f64;

    let values = vec![
        206.835 - 1.015 * wps - 84.6 * spw,
        0.39 * wps + 11.8 * spw - 15.59,
        4.71 * (c / n_words) + 0.5 * wps - 21.43,
        0.0588 * (100.0 * c / n_words) - 0.296 * (100.0 * n_sent / n_words) - 15.8,
        0.4 * (wps + 100.0 * complex / n_words),
        wps + 100.0 * long / n_words,
        1.0430 * (complex * 30.0 / n_sent).sqrt() + 3.1291,
        c,
        n_syll,
        n_words,
        n_sent,
        n_par,
        c / n_words,
        wps,
        c / n_sent,
        long,
        complex,
        types.len() as f64 / n_words,
        min_len,
        max_len,
        count(TOBE_VERBS),
        count(AUXILIARY_VERBS),
        count(CONJUNCTIONS),
        count(PRONOUNS),
        count(PREPOSITIONS),
        words.iter().filter(|w| is_nominalization(w)).count() as f64,
        begins(PRONOUNS),
        begins(INTERROGATIVES),
        begins(ARTICLES),
        begins(SUBORDINATORS),
        begins(CONJUNCTIONS),
        begins(PREPOSITIONS),
    ];
    FeatureVector::page(feature_names(), values)
}
