use super::CorpusError;

/// Tokens with their universal POS tags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    pub tokens: Vec<String>,
    pub pos: Vec<String>,
}

impl TaggedSentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

fn valid_tag(tag: &str) -> bool {
    !tag.is_empty() && tag.bytes().all(|b| b.is_ascii_uppercase())
}

/// Reads ID, FORM and UPOS from CoNLL-U. Comment lines, multiword ranges
/// (`3-4`) and empty nodes (`8.1`) are skipped.
pub fn parse_conllu(text: &str) -> Result<Vec<TaggedSentence>, CorpusError> {
    let mut out = Vec::new();
    let mut rows: Vec<(usize, String, String)> = Vec::new();

    let flush = |rows: &mut Vec<(usize, String, String)>, out: &mut Vec<TaggedSentence>| {
        if rows.is_empty() {
            return;
        }
        rows.sort_by_key(|r| r.0);
        let (tokens, pos) = rows.drain(..).map(|(_, f, p)| (f, p)).unzip();
        out.push(TaggedSentence { tokens, pos });
    };

    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut rows, &mut out);
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let perr = |message: &str| CorpusError::Parse {
            line: idx + 1,
            text: line.to_string(),
            message: message.to_string(),
        };
        let cols: Vec<&str> = line.split('\t').collect();
        let id = cols[0];
        if id.contains('-') && id.split('-').all(|p| p.parse::<usize>().is_ok()) {
            continue;
        }
        if id.contains('.') && id.split('.').all(|p| p.parse::<usize>().is_ok()) {
            continue;
        }
        let id: usize = id.parse().map_err(|_| perr("token ID is not an integer"))?;
        if cols.len() < 4 {
            return Err(perr("missing UPOS column"));
        }
        let form = cols[1];
        let upos = cols[3];
        if form.is_empty() || form.contains(char::is_whitespace) {
            return Err(perr("FORM must be a non-empty token without whitespace"));
        }
        if !valid_tag(upos) {
            return Err(perr("UPOS must be a non-empty uppercase ASCII tag"));
        }
        rows.push((id, form.to_string(), upos.to_string()));
    }
    flush(&mut rows, &mut out);
    Ok(out)
}
