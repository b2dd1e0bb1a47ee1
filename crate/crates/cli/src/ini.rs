//! Sectioned `key = value` text with line numbers kept for error messages.

use std::collections::BTreeMap;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Section {
    /// Line of the `[name]` header; 0 for the top-level section.
    pub line: usize,
    pub entries: BTreeMap<String, Entry>,
}

/// Parsed document. Keys before the first header live in the section `""`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub sections: BTreeMap<String, Section>,
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl Document {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut doc = Document::default();
        doc.sections.insert(String::new(), Section::default());
        let mut current = String::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split(['#', ';']).next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .map(str::trim)
                    .filter(|n| is_identifier(n))
                    .ok_or_else(|| CliError::schema_at(line, "", format!("malformed section header `{content}`")))?;
                if let Some(prev) = doc.sections.get(name) {
                    return Err(CliError::schema_at(
                        line,
                        name,
                        format!("section defined twice (first on line {})", prev.line),
                    ));
                }
                doc.sections.insert(
                    name.to_string(),
                    Section {
                        line,
                        entries: BTreeMap::new(),
                    },
                );
                current = name.to_string();
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| CliError::schema_at(line, &current, format!("expected `key = value`, found `{content}`")))?;
            let key = key.trim();
            if !is_identifier(key) {
                return Err(CliError::schema_at(line, &current, format!("invalid key `{key}`")));
            }
            let section = doc.sections.get_mut(&current).expect("current section exists");
            let path = field_path(&current, key);
            if let Some(prev) = section.entries.get(key) {
                return Err(CliError::schema_at(
                    line,
                    &path,
                    format!("key defined twice (first on line {})", prev.line),
                ));
            }
            section.entries.insert(
                key.to_string(),
                Entry {
                    value: value.trim().to_string(),
                    line,
                },
            );
        }
        Ok(doc)
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.get(name)
    }

    pub fn has_section(&self, name: &str) -> bool {
        !name.is_empty() && self.sections.contains_key(name)
    }
}

/// `section.key`, or just `key` at top level.
pub fn field_path(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let doc = Document::parse("seed = 3\n# note\n[habitat]\ndim = 1 ; inline\n\n[reaction]\nr0=2\n").unwrap();
        assert_eq!(doc.section("").unwrap().entries["seed"].value, "3");
        let h = doc.section("habitat").unwrap();
        assert_eq!(h.line, 3);
        assert_eq!(h.entries["dim"], Entry { value: "1".into(), line: 4 });
        assert_eq!(doc.section("reaction").unwrap().entries["r0"].line, 7);
    }

    #[test]
    fn reports_line_of_bad_input() {
        let err = Document::parse("[habitat]\ndim 1\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = Document::parse("[a]\nx = 1\nx = 2\n").unwrap_err();
        assert!(err.to_string().contains("a.x") && err.to_string().contains("line 3"), "{err}");
        let err = Document::parse("[a]\n[a]\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(Document::parse("[bad name]\n").is_err());
    }
}
