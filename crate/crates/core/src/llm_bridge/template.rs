use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Placeholders a prompt template may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Dialect,
    MaxNumber,
    Schema,
    Category,
    Statistics,
    QuestionI,
    AnswerI,
    JsonDescription,
    Item,
    Questions,
}

impl Slot {
    pub const ALL: [Slot; 10] = [
        Slot::Dialect,
        Slot::MaxNumber,
        Slot::Schema,
        Slot::Category,
        Slot::Statistics,
        Slot::QuestionI,
        Slot::AnswerI,
        Slot::JsonDescription,
        Slot::Item,
        Slot::Questions,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Slot::Dialect => "dialect",
            Slot::MaxNumber => "max_number",
            Slot::Schema => "schema",
            Slot::Category => "category",
            Slot::Statistics => "statistics",
            Slot::QuestionI => "question_i",
            Slot::AnswerI => "answer_i",
            Slot::JsonDescription => "json_description",
            Slot::Item => "item",
            Slot::Questions => "questions",
        }
    }

    fn is_history(self) -> bool {
        matches!(self, Slot::QuestionI | Slot::AnswerI)
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Slot {
    type Err = TemplateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Slot::ALL.into_iter().find(|slot| slot.name() == s).ok_or_else(|| TemplateError::UnknownSlot(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("unknown slot `{0}`")]
    UnknownSlot(String),
    #[error("slot `{0}` is not bound")]
    Unbound(Slot),
    #[error("unterminated `{{` at byte {0}")]
    Unterminated(usize),
    #[error("`{0}` is only allowed inside a history block")]
    HistoryOutsideBlock(Slot),
    #[error("malformed history block: {0}")]
    Block(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Text(String),
    Slot(Slot),
    History(Vec<Piece>),
}

/// Prompt text with `{slot}` placeholders.
///
/// `{{` and `}}` produce literal braces. A `{#history}…{/history}` block is
/// repeated once per question/answer pair and is the only place
/// `{question_i}` and `{answer_i}` may appear.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    name: String,
    pieces: Vec<Piece>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bindings {
    values: BTreeMap<Slot, String>,
    history: Vec<(String, String)>,
}

impl Bindings {
    pub fn new() -> Self {
        Bindings::default()
    }

    pub fn set(mut self, slot: Slot, value: impl Into<String>) -> Self {
        self.values.insert(slot, value.into());
        self
    }

    pub fn with_history(mut self, history: Vec<(String, String)>) -> Self {
        self.history = history;
        self
    }

    pub fn get(&self, slot: Slot) -> Option<&str> {
        self.values.get(&slot).map(String::as_str)
    }
}

fn parse_pieces(body: &str) -> Result<Vec<Piece>, TemplateError> {
    let mut top: Vec<Piece> = Vec::new();
    let mut block: Option<Vec<Piece>> = None;
    let mut text = String::new();
    let bytes = body.as_bytes();
    let mut i = 0;

    fn target<'a>(top: &'a mut Vec<Piece>, block: &'a mut Option<Vec<Piece>>) -> &'a mut Vec<Piece> {
        match block {
            Some(b) => b,
            None => top,
        }
    }

    while i < bytes.len() {
        let rest = &body[i..];
        if rest.starts_with("{{") {
            text.push('{');
            i += 2;
        } else if rest.starts_with("}}") {
            text.push('}');
            i += 2;
        } else if rest.starts_with('{') {
            let end = rest.find('}').ok_or(TemplateError::Unterminated(i))?;
            let name = &rest[1..end];
            if !text.is_empty() {
                target(&mut top, &mut block).push(Piece::Text(std::mem::take(&mut text)));
            }
            match name {
                "#history" => {
                    if block.is_some() {
                        return Err(TemplateError::Block("nested history block".into()));
                    }
                    block = Some(Vec::new());
                }
                "/history" => {
                    let inner = block.take().ok_or_else(|| TemplateError::Block("unopened history block".into()))?;
                    top.push(Piece::History(inner));
                }
                _ => {
                    let slot: Slot = name.parse()?;
                    if slot.is_history() && block.is_none() {
                        return Err(TemplateError::HistoryOutsideBlock(slot));
                    }
                    target(&mut top, &mut block).push(Piece::Slot(slot));
                }
            }
            i += end + 1;
        } else {
            let c = rest.chars().next().expect("non-empty remainder");
            text.push(c);
            i += c.len_utf8();
        }
    }
    if block.is_some() {
        return Err(TemplateError::Block("unclosed history block".into()));
    }
    if !text.is_empty() {
        top.push(Piece::Text(text));
    }
    Ok(top)
}

impl PromptTemplate {
    pub fn new(name: impl Into<String>, body: &str) -> Result<Self, TemplateError> {
        Ok(PromptTemplate { name: name.into(), pieces: parse_pieces(body)? })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Slots referenced anywhere in the template.
    pub fn slots(&self) -> Vec<Slot> {
        fn walk(pieces: &[Piece], out: &mut Vec<Slot>) {
            for p in pieces {
                match p {
                    Piece::Slot(s) if !out.contains(s) => out.push(*s),
                    Piece::History(inner) => walk(inner, out),
                    _ => {}
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.pieces, &mut out);
        out
    }

    /// Substitutes every slot verbatim. Fails on the first unbound slot.
    pub fn render(&self, bindings: &Bindings) -> Result<String, TemplateError> {
        for slot in self.slots() {
            if !slot.is_history() && bindings.get(slot).is_none() {
                return Err(TemplateError::Unbound(slot));
            }
        }
        let mut out = String::new();
        for piece in &self.pieces {
            match piece {
                Piece::Text(t) => out.push_str(t),
                Piece::Slot(s) => out.push_str(bindings.get(*s).expect("checked above")),
                Piece::History(inner) => {
                    for (question, answer) in &bindings.history {
                        for p in inner {
                            match p {
                                Piece::Text(t) => out.push_str(t),
                                Piece::Slot(Slot::QuestionI) => out.push_str(question),
                                Piece::Slot(Slot::AnswerI) => out.push_str(answer),
                                Piece::Slot(s) => out.push_str(bindings.get(*s).expect("checked above")),
                                Piece::History(_) => unreachable!("blocks do not nest"),
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}
