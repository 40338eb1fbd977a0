//! Structured response validation.

use serde_json::Value;

use repcheck_core::checklist::{ChecklistItem, FieldAnswer};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("value {0:?} is outside the item's domain")]
    OutOfDomain(String),
}

/// First balanced `{...}` in `text`, skipping braces inside JSON strings.
fn first_object(text: &str) -> Option<&str> {
    let start = text.find('{')?;
    let mut depth = 0usize;
    let mut in_str = false;
    let mut escaped = false;
    for (i, c) in text[start..].char_indices() {
        if in_str {
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_str = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => in_str = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[start..start + i + 1]);
                }
            }
            _ => {}
        }
    }
    None
}

/// Maps a returned value onto the item's canonical spelling.
fn canonical(item: &ChecklistItem, value: &str) -> Option<String> {
    let v = value.trim();
    let options = item.value_domain.options();
    if let Some(o) = options.iter().find(|o| o.eq_ignore_ascii_case(v)) {
        return Some(o.to_string());
    }
    let synonym = match v.to_ascii_lowercase().as_str() {
        "yes" => "Y",
        "no" => "N",
        "n/a" | "not applicable" => "NA",
        _ => return None,
    };
    options.contains(&synonym).then(|| synonym.to_string())
}

/// Extracts `{answer, disambiguation}` from a raw provider response. Prose
/// or markdown fencing around the JSON body is ignored.
pub fn parse_field_response(item: &ChecklistItem, raw: &str) -> Result<FieldAnswer, ParseError> {
    let body = first_object(raw).ok_or_else(|| ParseError::Malformed("no JSON object found".into()))?;
    let parsed: Value = serde_json::from_str(body).map_err(|e| ParseError::Malformed(e.to_string()))?;
    let value = parsed
        .get("answer")
        .or_else(|| parsed.get("value"))
        .ok_or_else(|| ParseError::Malformed("missing answer".into()))?;
    let value = value
        .as_str()
        .ok_or_else(|| ParseError::Malformed("answer is not a string".into()))?;
    let disambiguation = parsed
        .get("disambiguation")
        .and_then(Value::as_str)
        .unwrap_or_default();
    let canonical = canonical(item, value).ok_or_else(|| ParseError::OutOfDomain(value.to_string()))?;
    Ok(FieldAnswer::new(canonical, disambiguation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use repcheck_core::checklist::{FieldKind, ValueDomain};

    fn ternary() -> ChecklistItem {
        ChecklistItem::new("t", "Method", "T", ValueDomain::Ternary, FieldKind::Standard)
    }

    #[test]
    fn direct() {
        let a = parse_field_response(&ternary(), r#"{"answer":"Y","disambiguation":"stated in the setup"}"#).unwrap();
        assert_eq!(a, FieldAnswer::new("Y", "stated in the setup"));
    }

    #[test]
    fn out_of_domain() {
        let e = parse_field_response(&ternary(), r#"{"answer":"Perhaps","disambiguation":""}"#);
        assert_eq!(e, Err(ParseError::OutOfDomain("Perhaps".into())));
    }

    #[test]
    fn fenced_equals_unfenced() {
        let plain = r#"{"answer":"NA","disambiguation":"no {braces} here"}"#;
        let fenced = format!("Here you go:\n```json\n{plain}\n```\nThanks.");
        assert_eq!(
            parse_field_response(&ternary(), plain).unwrap(),
            parse_field_response(&ternary(), &fenced).unwrap()
        );
    }

    #[test]
    fn synonyms_and_case() {
        assert_eq!(parse_field_response(&ternary(), r#"{"answer":"yes"}"#).unwrap().value, "Y");
        assert_eq!(parse_field_response(&ternary(), r#"{"value":"na"}"#).unwrap().value, "NA");
        let cat = ChecklistItem::new(
            "c",
            "General",
            "C",
            ValueDomain::Categorical { options: vec!["empirical".into(), "theoretical".into()] },
            FieldKind::Standard,
        );
        assert_eq!(parse_field_response(&cat, r#"{"answer":"Empirical"}"#).unwrap().value, "empirical");
        assert!(parse_field_response(&cat, r#"{"answer":"yes"}"#).is_err());
    }

    #[test]
    fn garbage() {
        assert!(matches!(parse_field_response(&ternary(), "no idea"), Err(ParseError::Malformed(_))));
        assert!(matches!(parse_field_response(&ternary(), "{\"answer\": "), Err(ParseError::Malformed(_))));
        assert!(matches!(parse_field_response(&ternary(), r#"{"answer": 3}"#), Err(ParseError::Malformed(_))));
    }
}
