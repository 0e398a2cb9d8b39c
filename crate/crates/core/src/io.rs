//! Native JSON and PNML input, canonical JSON output.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use crate::error::NetError;
use crate::net::{Net, NetSpec, TransitionSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Pnml,
}

impl Format {
    /// `.pnml` and `.xml` are PNML, everything else JSON.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase) {
            Some(ext) if ext == "pnml" || ext == "xml" => Format::Pnml,
            _ => Format::Json,
        }
    }
}

/// Explicit designation of the initial/final place, overriding detection.
#[derive(Clone, Debug, Default)]
pub struct Designation {
    pub initial: Option<String>,
    pub final_place: Option<String>,
}

pub fn load_file(path: &Path, format: Option<Format>, designation: &Designation) -> Result<Net, NetError> {
    let text = std::fs::read_to_string(path).map_err(|source| NetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_str(&text, format.unwrap_or_else(|| Format::from_path(path)), designation)
}

pub fn load_str(text: &str, format: Format, designation: &Designation) -> Result<Net, NetError> {
    let mut spec = match format {
        Format::Json => parse_json(text)?,
        Format::Pnml => parse_pnml(text)?,
    };
    if let Some(i) = &designation.initial {
        spec.initial_place = Some(i.clone());
    }
    if let Some(f) = &designation.final_place {
        spec.final_place = Some(f.clone());
    }
    Net::from_spec(spec)
}

pub fn load_json(text: &str) -> Result<Net, NetError> {
    Net::from_spec(parse_json(text)?)
}

pub fn load_pnml(text: &str) -> Result<Net, NetError> {
    Net::from_spec(parse_pnml(text)?)
}

fn parse_json(text: &str) -> Result<NetSpec, NetError> {
    serde_json::from_str(text).map_err(|e| NetError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Canonical JSON: sorted keys, two-space indent, LF line endings, trailing newline.
pub fn to_json(net: &Net) -> String {
    let value = serde_json::to_value(net.to_spec()).expect("net spec serializes");
    let mut out = serde_json::to_string_pretty(&value).expect("value serializes");
    out.push('\n');
    out
}

pub fn save_json(net: &Net, path: &Path) -> Result<(), NetError> {
    std::fs::write(path, to_json(net)).map_err(|source| NetError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Place,
    Transition,
}

fn parse_pnml(text: &str) -> Result<NetSpec, NetError> {
    let doc = roxmltree::Document::parse(text).map_err(|e| NetError::Pnml {
        position: e.pos().to_string(),
        message: e.to_string(),
    })?;
    let position = |node: roxmltree::Node| doc.text_pos_at(node.range().start).to_string();
    let net_node = doc
        .descendants()
        .find(|n| n.has_tag_name("net"))
        .ok_or_else(|| NetError::Pnml {
            position: "1:1".into(),
            message: "no <net> element".into(),
        })?;
    let name = child_text(net_node, "name")
        .or_else(|| net_node.attribute("id").map(str::to_string))
        .unwrap_or_default();

    let mut kinds: HashMap<String, Kind> = HashMap::new();
    let mut places = Vec::new();
    let mut transitions = Vec::new();
    for node in net_node.descendants().filter(|n| n.is_element()) {
        let kind = match node.tag_name().name() {
            "place" => Kind::Place,
            "transition" => Kind::Transition,
            _ => continue,
        };
        let id = node.attribute("id").ok_or_else(|| NetError::Pnml {
            position: position(node),
            message: format!("<{}> without id", node.tag_name().name()),
        })?;
        if kinds.insert(id.to_string(), kind).is_some() {
            return Err(NetError::DuplicateId(id.to_string()));
        }
        match kind {
            Kind::Place => places.push(id.to_string()),
            Kind::Transition => transitions.push(id.to_string()),
        }
    }

    let mut pre: HashMap<String, BTreeMap<String, u64>> = HashMap::new();
    let mut post: HashMap<String, BTreeMap<String, u64>> = HashMap::new();
    let mut has_incoming: HashMap<&str, bool> = HashMap::new();
    let mut has_outgoing: HashMap<&str, bool> = HashMap::new();
    for arc in net_node.descendants().filter(|n| n.has_tag_name("arc")) {
        let arc_id = arc.attribute("id").unwrap_or("").to_string();
        let endpoint = |attr: &str| -> Result<(&str, Kind), NetError> {
            let id = arc.attribute(attr).ok_or_else(|| NetError::Pnml {
                position: position(arc),
                message: format!("arc `{arc_id}` without {attr}"),
            })?;
            let kind = kinds.get(id).copied().ok_or_else(|| NetError::Pnml {
                position: position(arc),
                message: format!("arc `{arc_id}` references unknown node `{id}`"),
            })?;
            Ok((id, kind))
        };
        let (source, source_kind) = endpoint("source")?;
        let (target, target_kind) = endpoint("target")?;
        if source_kind == target_kind {
            return Err(NetError::SameKindArc {
                arc: arc_id,
                kind: if source_kind == Kind::Place {
                    "place"
                } else {
                    "transition"
                },
                source_id: source.to_string(),
                target: target.to_string(),
            });
        }
        let weight = match child_text(arc, "inscription") {
            None => 1,
            Some(text) => text
                .trim()
                .parse::<u64>()
                .ok()
                .filter(|&w| w > 0)
                .ok_or_else(|| NetError::Pnml {
                    position: position(arc),
                    message: format!("arc `{arc_id}` has invalid inscription `{}`", text.trim()),
                })?,
        };
        has_outgoing.insert(source, true);
        has_incoming.insert(target, true);
        if source_kind == Kind::Place {
            *pre.entry(target.to_string())
                .or_default()
                .entry(source.to_string())
                .or_insert(0) += weight;
        } else {
            *post
                .entry(source.to_string())
                .or_default()
                .entry(target.to_string())
                .or_insert(0) += weight;
        }
    }

    let unique = |candidates: Vec<&String>| match candidates.as_slice() {
        [only] => Some((*only).clone()),
        _ => None,
    };
    let initial_place = unique(
        places
            .iter()
            .filter(|p| !has_incoming.contains_key(p.as_str()))
            .collect(),
    );
    let final_place = unique(
        places
            .iter()
            .filter(|p| !has_outgoing.contains_key(p.as_str()))
            .collect(),
    );

    let transitions = transitions
        .into_iter()
        .map(|id| TransitionSpec {
            pre: pre.remove(&id).unwrap_or_default(),
            post: post.remove(&id).unwrap_or_default(),
            id,
        })
        .collect();
    Ok(NetSpec {
        name,
        places,
        transitions,
        initial_place,
        final_place,
    })
}

/// Text of `<tag><text>..</text></tag>` directly under `node`.
fn child_text(node: roxmltree::Node, tag: &str) -> Option<String> {
    let child = node.children().find(|c| c.has_tag_name(tag))?;
    let text = child.children().find(|c| c.has_tag_name("text"))?;
    text.text().map(str::to_string)
}

/// PNML export of the basic place/transition subset.
pub fn to_pnml(net: &Net) -> String {
    let escape = |s: &str| {
        s.replace('&', "&amp;")
            .replace('<', "&lt;")
            .replace('>', "&gt;")
            .replace('"', "&quot;")
    };
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<pnml>\n");
    out.push_str(&format!(
        "  <net id=\"{}\" type=\"http://www.pnml.org/version-2009/grammar/ptnet\">\n",
        escape(net.name())
    ));
    out.push_str(&format!("    <name><text>{}</text></name>\n", escape(net.name())));
    out.push_str("    <page id=\"page0\">\n");
    for name in net.place_names() {
        out.push_str(&format!("      <place id=\"{}\"/>\n", escape(name)));
    }
    for t in net.transitions() {
        out.push_str(&format!("      <transition id=\"{}\"/>\n", escape(&t.name)));
    }
    let mut arc = 0usize;
    let mut emit = |source: &str, target: &str, w: u64, out: &mut String| {
        let inscription = if w == 1 {
            String::new()
        } else {
            format!("<inscription><text>{w}</text></inscription>")
        };
        out.push_str(&format!(
            "      <arc id=\"a{arc}\" source=\"{}\" target=\"{}\">{inscription}</arc>\n",
            escape(source),
            escape(target)
        ));
        arc += 1;
    };
    for t in net.transitions() {
        for (p, w) in t.pre.iter() {
            emit(net.place_name(p), &t.name, w, &mut out);
        }
        for (p, w) in t.post.iter() {
            emit(&t.name, net.place_name(p), w, &mut out);
        }
    }
    out.push_str("    </page>\n  </net>\n</pnml>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const FORK_JOIN: &str = r#"{
        "name": "fork-join",
        "places": ["i", "p1", "p2", "q1", "q2", "f"],
        "transitions": [
            {"id": "s", "pre": {"i": 1}, "post": {"p1": 1, "p2": 1}},
            {"id": "t1", "pre": {"p1": 1}, "post": {"q1": 1}},
            {"id": "t2", "pre": {"p2": 1}, "post": {"q2": 1}},
            {"id": "u", "pre": {"q1": 1, "q2": 1}, "post": {"f": 1}}
        ],
        "initial_place": "i",
        "final_place": "f"
    }"#;

    #[test]
    fn loads_fork_join() {
        let net = load_json(FORK_JOIN).unwrap();
        assert_eq!(net.num_places(), 6);
        assert_eq!(net.num_transitions(), 4);
        assert_eq!(net.initial(), net.place("i"));
    }

    #[test]
    fn json_round_trip_is_canonical() {
        let net = load_json(FORK_JOIN).unwrap();
        let text = to_json(&net);
        assert!(!text.contains('\r'));
        let again = load_json(&text).unwrap();
        assert_eq!(net, again);
        assert_eq!(text, to_json(&again));
        let keys: Vec<usize> = [
            "\"final_place\"",
            "\"initial_place\"",
            "\"name\"",
            "\"places\"",
            "\"transitions\"",
        ]
        .iter()
        .map(|k| text.find(k).unwrap())
        .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn empty_json_net() {
        let net = load_json(r#"{"name": "e", "places": [], "transitions": []}"#).unwrap();
        assert_eq!(net.size(), 0);
        assert_eq!(net.initial(), None);
    }

    #[test]
    fn json_errors_carry_position() {
        match load_json("{\n  \"name\": 3\n}") {
            Err(NetError::Json { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let zero = r#"{"name":"z","places":["p"],"transitions":[{"id":"t","pre":{"p":0},"post":{}}]}"#;
        assert!(matches!(load_json(zero), Err(NetError::ZeroWeight { .. })));
    }

    const PNML: &str = r#"<?xml version="1.0"?>
<pnml>
  <net id="n1" type="http://www.pnml.org/version-2009/grammar/ptnet">
    <name><text>weighted</text></name>
    <page id="g">
      <place id="i"><name><text>start</text></name><initialMarking><text>1</text></initialMarking></place>
      <place id="f"/>
      <transition id="t"><graphics><position x="1" y="2"/></graphics></transition>
      <arc id="a1" source="i" target="t"><inscription><text>5</text></inscription></arc>
      <arc id="a2" source="t" target="f"/>
      <toolspecific tool="x"/>
    </page>
  </net>
</pnml>"#;

    #[test]
    fn pnml_weights_and_designation() {
        let net = load_pnml(PNML).unwrap();
        let t = net.transition_named("t").unwrap();
        assert_eq!(net.pre(t).get(net.place("i").unwrap()), 5);
        assert_eq!(net.post(t).get(net.place("f").unwrap()), 1);
        assert_eq!(net.initial(), net.place("i"));
        assert_eq!(net.final_place(), net.place("f"));
        assert_eq!(net.name(), "weighted");
    }

    #[test]
    fn pnml_round_trip() {
        let net = load_pnml(PNML).unwrap();
        let again = load_pnml(&to_pnml(&net)).unwrap();
        assert_eq!(net, again);
    }

    #[test]
    fn pnml_rejects_place_to_place() {
        let text =
            r#"<pnml><net id="n"><place id="a"/><place id="b"/><arc id="x" source="a" target="b"/></net></pnml>"#;
        assert!(matches!(load_pnml(text), Err(NetError::SameKindArc { .. })));
        let dup = r#"<pnml><net id="n"><place id="a"/><transition id="a"/></net></pnml>"#;
        assert!(matches!(load_pnml(dup), Err(NetError::DuplicateId(_))));
    }

    #[test]
    fn designation_overrides_detection() {
        let d = Designation {
            initial: Some("f".into()),
            final_place: Some("i".into()),
        };
        let net = load_str(PNML, Format::Pnml, &d).unwrap();
        assert_eq!(net.initial(), net.place("f"));
    }
}
