use super::LlmError;

const FENCE: &str = "```";

/// Returns the first balanced top-level `{...}` block in `raw`, looking
/// inside fenced code blocks first.
pub fn extract_json_block(raw: &str) -> Result<String, LlmError> {
    for body in fenced_bodies(raw) {
        if let Some(block) = first_balanced_object(body) {
            return Ok(block.to_owned());
        }
    }
    first_balanced_object(raw)
        .map(str::to_owned)
        .ok_or(LlmError::NoJsonFound)
}

/// Interiors of complete ``` fences, in order. The opening fence's info
/// string (e.g. `json`) is skipped.
fn fenced_bodies(raw: &str) -> Vec<&str> {
    let mut bodies = Vec::new();
    let mut rest = raw;
    while let Some(open) = rest.find(FENCE) {
        let after_open = &rest[open + FENCE.len()..];
        let body_start = after_open.find('\n').map_or(after_open.len(), |i| i + 1);
        let body = &after_open[body_start..];
        match body.find(FENCE) {
            Some(close) => {
                bodies.push(&body[..close]);
                rest = &body[close + FENCE.len()..];
            }
            None => break,
        }
    }
    bodies
}

fn first_balanced_object(text: &str) -> Option<&str> {
    let bytes = text.as_bytes();
    let mut start = 0;
    while let Some(offset) = text[start..].find('{') {
        let open = start + offset;
        if let Some(close) = matching_brace(bytes, open) {
            return Some(&text[open..=close]);
        }
        start = open + 1;
    }
    None
}

/// Index of the brace closing the one at `open`, skipping braces that sit
/// inside JSON strings.
fn matching_brace(bytes: &[u8], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(open) {
        if in_string {
            match b {
                _ if escaped => escaped = false,
                b'\\' => escaped = true,
                b'"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fenced_block_preferred() {
        let raw = "Here you go:\n```json\n{\"learning_rate\":0.001}\n```";
        assert_eq!(extract_json_block(raw).unwrap(), r#"{"learning_rate":0.001}"#);
        let raw = "{\"outside\":1}\n```\n{\"inside\":2}\n```";
        assert_eq!(extract_json_block(raw).unwrap(), r#"{"inside":2}"#);
    }

    #[test]
    fn nested_braces_and_trailing_prose() {
        let raw = "{\"a\":{\"b\":1}} trailing prose";
        assert_eq!(extract_json_block(raw).unwrap(), r#"{"a":{"b":1}}"#);
    }

    #[test]
    fn braces_inside_strings_are_ignored() {
        let raw = r#"note: {"text":"a } tricky \" { string","n":1} done"#;
        assert_eq!(
            extract_json_block(raw).unwrap(),
            r#"{"text":"a } tricky \" { string","n":1}"#
        );
    }

    #[test]
    fn nothing_found() {
        assert_eq!(extract_json_block("no config, sorry"), Err(LlmError::NoJsonFound));
        assert_eq!(extract_json_block("{ never closed"), Err(LlmError::NoJsonFound));
    }

    #[test]
    fn fence_without_object_falls_back_to_whole_text() {
        let raw = "```\nplain\n```\nthen {\"x\":1}";
        assert_eq!(extract_json_block(raw).unwrap(), r#"{"x":1}"#);
    }
}
