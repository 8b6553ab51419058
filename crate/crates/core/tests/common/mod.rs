//! Generators shared by the property tests and the acceptance suite.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::sample::select;
use serde_json::{json, Map, Value};

pub fn fixtures_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn word() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9]{0,6}"
}

fn sentence() -> impl Strategy<Value = String> {
    "[A-Z][a-z]{1,8}( [a-z0-9]{1,8}){0,5}\\.?"
}

fn attr_value() -> impl Strategy<Value = String> {
    "[A-Za-z0-9][A-Za-z0-9 ._/-]{0,12}"
}

fn attributes() -> impl Strategy<Value = Map<String, Value>> {
    let key = select(vec!["id", "class", "name", "href", "type", "aria-label", "placeholder", "title", "role"]);
    prop::collection::btree_map(key, attr_value(), 0..4)
        .prop_map(|m| m.into_iter().map(|(k, v)| (k.to_owned(), Value::from(v))).collect())
}

fn element(tags: Vec<&'static str>) -> impl Strategy<Value = Value> {
    (select(tags), prop::option::of(sentence()), attributes()).prop_map(|(tag, text, attrs)| {
        let mut e = json!({"tag_name": tag, "attributes": attrs});
        if let Some(t) = text {
            e["text_content"] = Value::from(t);
        }
        e
    })
}

/// A step that references no parameter.
fn plain_step() -> impl Strategy<Value = Value> {
    let step = |action: &str, guidance: String, element: Option<Value>, params: Value| {
        let mut s = json!({"guidance": guidance, "action_type": action, "params": params});
        if let Some(e) = element {
            s["element_ref"] = e;
        }
        s
    };
    prop_oneof![
        (sentence(), element(vec!["a", "button", "input", "span", "li"]))
            .prop_map(move |(g, e)| step("click", g, Some(e), json!({}))),
        (sentence(), element(vec!["select"]), sentence())
            .prop_map(move |(g, e, t)| step("select_dropdown", g, Some(e), json!({"text": t}))),
        (sentence(), select(vec!["up", "down"]), 1u32..4)
            .prop_map(move |(g, d, p)| step("scroll", g, None, json!({"direction": d, "pages": p}))),
        (sentence(), select(vec!["Enter", "Tab", "Escape"]))
            .prop_map(move |(g, k)| step("send_keys", g, None, json!({"keys": k}))),
        (sentence(), word(), any::<bool>()).prop_map(move |(g, w, nt)| step(
            "navigate",
            g,
            None,
            json!({"url": format!("http://shop.test/{w}"), "new_tab": nt})
        )),
        (sentence(), 1u32..5).prop_map(move |(g, s)| step("wait", g, None, json!({"seconds": s}))),
    ]
}

fn default_for(ty: &str, n: i64) -> Value {
    match ty {
        "str" => Value::from(format!("v{n}")),
        "int" => Value::from(n),
        "float" => json!(n as f64 + 0.5),
        _ => Value::from(n % 2 == 0),
    }
}

fn parameter() -> impl Strategy<Value = (String, &'static str, bool, i64, String)> {
    (word(), select(vec!["str", "int", "float", "bool"]), any::<bool>(), 0i64..100, sentence())
}

fn meta_url() -> impl Strategy<Value = String> {
    let seg = select(vec!["shopping", "gitlab", "catalogsearch", "issues", "-", "result", "*"]);
    (select(vec!["shopping", "gitlab", "reddit"]), prop::collection::vec(seg, 0..4))
        .prop_map(|(site, rest)| std::iter::once(site).chain(rest).collect::<Vec<_>>().join("/"))
}

/// A valid skill document. Every parameter is used by exactly one input
/// step; optional parameters carry defaults.
pub fn skill_doc() -> impl Strategy<Value = Value> {
    (
        "[a-z][a-z0-9]{0,8}(_[a-z0-9]{1,6}){0,3}",
        sentence(),
        meta_url(),
        prop::option::of(word()),
        prop::collection::vec(parameter(), 0..4),
        prop::collection::vec(plain_step(), 0..4),
        element(vec!["input", "textarea"]),
    )
        .prop_filter("at least one step", |(_, _, _, _, params, steps, _)| {
            !params.is_empty() || !steps.is_empty()
        })
        .prop_map(|(name, description, meta_url, start, params, mut steps, input)| {
            let mut parameters = Vec::new();
            for (i, (base, ty, required, n, desc)) in params.into_iter().enumerate() {
                let pname = format!("{base}_{i}");
                let mut p = json!({"name": pname, "type": ty, "description": desc, "required": required});
                if !required {
                    p["default"] = default_for(ty, n);
                }
                parameters.push(p);
                steps.insert(
                    i.min(steps.len()),
                    json!({
                        "guidance": format!("Enter the {pname}."),
                        "action_type": "input",
                        "element_ref": input.clone(),
                        "params": {"text": format!("{{{{{pname}}}}}"), "clear": n % 2 == 0}
                    }),
                );
            }
            let mut doc = json!({
                "name": name,
                "description": description,
                "meta_url": meta_url,
                "parameters": parameters,
                "action_steps": steps,
            });
            if let Some(s) = start {
                doc["start_url"] = Value::from(format!("http://shop.test/{s}"));
            }
            doc
        })
}

/// Glob patterns over a small alphabet so that matches are common.
pub fn glob_pattern() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        3 => Just("*".to_owned()),
        2 => Just("/".to_owned()),
        1 => Just("-".to_owned()),
        4 => "[ab]{1,2}",
    ];
    prop::collection::vec(piece, 0..7).prop_map(|v| v.concat())
}

pub fn glob_path() -> impl Strategy<Value = String> {
    "[ab/\\-]{0,10}"
}

/// Anchored-regex reading of a glob: `*` is `.*`, everything else literal.
pub fn glob_regex(pattern: &str) -> regex::Regex {
    let body: Vec<String> = pattern.split('*').map(regex::escape).collect();
    regex::Regex::new(&format!("(?s)^{}$", body.join(".*"))).unwrap()
}
