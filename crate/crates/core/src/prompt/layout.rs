//! Template filling and budget-driven truncation.
//!
//! A prompt is a template with `{{slot}}` placeholders. Fixed slots are
//! mandatory text; list slots hold droppable items. When the rendered prompt
//! exceeds the budget, items are dropped one at a time, least important
//! first, and each list that lost items renders its truncation marker.

use std::cmp::Reverse;

use crate::evidence::Severity;

use super::PromptError;

pub const TRUNCATION_MARKER: &str = "[truncated]....";

/// Where an item came from. Later variants win ties within a severity tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Source {
    ApiList,
    VisibleText,
    DomMeta,
    StaticFlags,
    DynamicTrace,
}

#[derive(Debug, Clone)]
pub struct Item {
    pub text: String,
    /// `None` marks routine content, dropped before any rated item.
    pub severity: Option<Severity>,
    pub source: Source,
}

impl Item {
    pub fn new(text: impl Into<String>, severity: Option<Severity>, source: Source) -> Self {
        Item { text: text.into(), severity, source }
    }

    fn rank(&self) -> (u8, Source) {
        (self.severity.map_or(0, |s| s as u8 + 1), self.source)
    }
}

type Render = Box<dyn Fn(&[&str], bool) -> String>;

struct ListSlot {
    name: &'static str,
    items: Vec<Item>,
    kept: Vec<bool>,
    render: Render,
}

impl ListSlot {
    fn text(&self) -> String {
        let kept: Vec<&str> = self.items.iter().zip(&self.kept).filter(|(_, k)| **k).map(|(i, _)| i.text.as_str()).collect();
        let dropped = kept.len() < self.items.len();
        (self.render)(&kept, dropped)
    }
}

pub struct Draft {
    template: &'static str,
    fixed: Vec<(&'static str, String)>,
    lists: Vec<ListSlot>,
}

impl Draft {
    pub fn new(template: &'static str) -> Self {
        Draft { template, fixed: Vec::new(), lists: Vec::new() }
    }

    pub fn set(&mut self, name: &'static str, value: impl Into<String>) -> &mut Self {
        self.fixed.push((name, value.into()));
        self
    }

    pub fn list(&mut self, name: &'static str, items: Vec<Item>, render: impl Fn(&[&str], bool) -> String + 'static) -> &mut Self {
        let kept = vec![true; items.len()];
        self.lists.push(ListSlot { name, items, kept, render: Box::new(render) });
        self
    }

    pub fn render(&self) -> Result<String, PromptError> {
        let mut out = String::with_capacity(self.template.len() + 256);
        let mut rest = self.template;
        while let Some(start) = rest.find("{{") {
            out.push_str(&rest[..start]);
            let after = &rest[start + 2..];
            let end = after.find("}}").ok_or_else(|| PromptError::Template("unclosed placeholder".into()))?;
            let name = &after[..end];
            if let Some((_, v)) = self.fixed.iter().find(|(n, _)| *n == name) {
                out.push_str(v);
            } else if let Some(l) = self.lists.iter().find(|l| l.name == name) {
                out.push_str(&l.text());
            } else {
                return Err(PromptError::Template(format!("no value for placeholder {name}")));
            }
            rest = &after[end + 2..];
        }
        out.push_str(rest);
        Ok(out)
    }

    /// Drops items until `fits` accepts the rendering. Fails when even the
    /// skeleton with every list emptied does not fit.
    pub fn fit(&mut self, fits: impl Fn(&str) -> bool) -> Result<String, PromptError> {
        loop {
            let text = self.render()?;
            if fits(&text) {
                return Ok(text);
            }
            let victim = self
                .lists
                .iter()
                .enumerate()
                .flat_map(|(s, l)| l.items.iter().enumerate().filter(|(i, _)| l.kept[*i]).map(move |(i, item)| (s, i, item.rank())))
                .min_by_key(|&(s, i, rank)| (rank, Reverse(i), Reverse(s)));
            match victim {
                Some((s, i, _)) => self.lists[s].kept[i] = false,
                None => return Err(PromptError::BudgetTooSmall { skeleton: text }),
            }
        }
    }
}

/// `a, b, c` with the marker appended when items were dropped; `none` when empty.
pub fn comma_list(items: &[&str], dropped: bool) -> String {
    let mut parts: Vec<&str> = items.to_vec();
    if dropped {
        parts.push(TRUNCATION_MARKER);
    }
    if parts.is_empty() {
        "none".to_string()
    } else {
        parts.join(", ")
    }
}

/// One `- item` line per entry plus a trailing blank line, or nothing at all
/// when empty, so an optional block collapses into the surrounding template.
pub fn optional_block(heading: &str, items: &[&str], dropped: bool) -> String {
    if items.is_empty() && !dropped {
        return String::new();
    }
    let mut out = String::from("\n");
    if !heading.is_empty() {
        out.push_str(heading);
        out.push('\n');
    }
    for i in items {
        out.push_str("- ");
        out.push_str(i);
        out.push('\n');
    }
    if dropped {
        out.push_str(TRUNCATION_MARKER);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn items(n: usize, sev: Option<Severity>) -> Vec<Item> {
        (0..n).map(|i| Item::new(format!("item{i}"), sev, Source::ApiList)).collect()
    }

    #[test]
    fn fills_placeholders() {
        let mut d = Draft::new("a={{a}} list={{l}}.");
        d.set("a", "1").list("l", items(2, None), comma_list);
        assert_eq!(d.render().unwrap(), "a=1 list=item0, item1.");
    }

    #[test]
    fn unknown_placeholder_is_an_error() {
        let d = Draft::new("{{missing}}");
        assert!(matches!(d.render(), Err(PromptError::Template(_))));
    }

    #[test]
    fn drops_tail_of_routine_items_first() {
        let mut d = Draft::new("{{l}}");
        let mut v = items(4, None);
        v[3].severity = Some(Severity::High);
        d.list("l", v, comma_list);
        let out = d.fit(|t| t.len() < 26).unwrap();
        assert_eq!(out, "item3, [truncated]....");
    }

    #[test]
    fn skeleton_too_large() {
        let mut d = Draft::new("fixed text {{l}}");
        d.list("l", items(3, None), comma_list);
        match d.fit(|t| t.len() < 5) {
            Err(PromptError::BudgetTooSmall { skeleton }) => assert_eq!(skeleton, "fixed text [truncated]...."),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn optional_block_collapses() {
        assert_eq!(optional_block("H:", &[], false), "");
        assert_eq!(optional_block("H:", &["x"], false), "\nH:\n- x\n");
    }
}
