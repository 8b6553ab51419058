//! Executable skill model.
//!
//! A [`Skill`] is a named, parameterized browser action program where every
//! step carries natural language guidance. Skills are parsed from the JSON
//! library format with path-aware validation, and turned into concrete
//! action lists by [`Skill::substitute_params`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::graph::UrlPattern;

/// Library file format version written by [`SkillLibraryFile`].
pub const LIBRARY_FORMAT_VERSION: u64 = 1;

fn placeholder_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{\{\s*([A-Za-z_][A-Za-z0-9_]*)\s*\}\}").unwrap())
}

fn skill_name_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[a-z][a-z0-9_]*$").unwrap())
}

fn ident_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[A-Za-z_][A-Za-z0-9_]*$").unwrap())
}

/// Names of all `{{x}}` placeholders in `text`, in order of appearance.
pub fn placeholders(text: &str) -> impl Iterator<Item = &str> {
    placeholder_re()
        .captures_iter(text)
        .map(|c| c.get(1).unwrap().as_str())
}

/// Browser action kinds a skill step may perform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionType {
    Click,
    Input,
    SelectDropdown,
    Scroll,
    SendKeys,
    Navigate,
    Wait,
}

impl ActionType {
    pub const ALL: [ActionType; 7] = [
        ActionType::Click,
        ActionType::Input,
        ActionType::SelectDropdown,
        ActionType::Scroll,
        ActionType::SendKeys,
        ActionType::Navigate,
        ActionType::Wait,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ActionType::Click => "click",
            ActionType::Input => "input",
            ActionType::SelectDropdown => "select_dropdown",
            ActionType::Scroll => "scroll",
            ActionType::SendKeys => "send_keys",
            ActionType::Navigate => "navigate",
            ActionType::Wait => "wait",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == s)
    }

    /// Whether a step of this type must target an element.
    pub fn requires_element(self) -> bool {
        matches!(
            self,
            ActionType::Click | ActionType::Input | ActionType::SelectDropdown
        )
    }

    /// Param keys a step of this type may carry, in rendering order.
    pub fn allowed_params(self) -> &'static [&'static str] {
        match self {
            ActionType::Click => &[],
            ActionType::Input => &["text", "clear"],
            ActionType::SelectDropdown => &["text"],
            ActionType::Scroll => &["direction", "pages"],
            ActionType::SendKeys => &["keys"],
            ActionType::Navigate => &["url", "new_tab"],
            ActionType::Wait => &["seconds"],
        }
    }

    /// State-mutating ("write") actions. Scroll and wait only read.
    pub fn is_interactive(self) -> bool {
        !matches!(self, ActionType::Scroll | ActionType::Wait)
    }
}

impl fmt::Display for ActionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Declarative description of a target element, resolved against the live
/// page at execution time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementRef {
    pub tag_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_content: Option<String>,
    #[serde(default)]
    pub attributes: BTreeMap<String, String>,
}

impl ElementRef {
    pub fn new(tag_name: impl Into<String>) -> Self {
        Self {
            tag_name: tag_name.into(),
            text_content: None,
            attributes: BTreeMap::new(),
        }
    }

    pub fn with_attr(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.attributes.insert(key.into(), value.into());
        self
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.text_content = Some(text.into());
        self
    }

    pub fn attr(&self, key: &str) -> Option<&str> {
        self.attributes.get(key).map(String::as_str)
    }
}

/// Declared type of a skill parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamType {
    Str,
    Int,
    Float,
    Bool,
}

impl ParamType {
    pub fn as_str(self) -> &'static str {
        match self {
            ParamType::Str => "str",
            ParamType::Int => "int",
            ParamType::Float => "float",
            ParamType::Bool => "bool",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "str" => Some(ParamType::Str),
            "int" => Some(ParamType::Int),
            "float" => Some(ParamType::Float),
            "bool" => Some(ParamType::Bool),
            _ => None,
        }
    }

    /// Canonical text rendering of `value` under this type, or `None` when
    /// the value does not fit the type.
    pub fn render(self, value: &Value) -> Option<String> {
        match (self, value) {
            (ParamType::Str, Value::String(s)) => Some(s.clone()),
            (ParamType::Str, Value::Number(n)) => Some(n.to_string()),
            (ParamType::Str, Value::Bool(b)) => Some(b.to_string()),
            (ParamType::Int, Value::Number(n)) => n
                .as_i64()
                .map(|i| i.to_string())
                .or_else(|| n.as_u64().map(|u| u.to_string())),
            (ParamType::Int, Value::String(s)) => s.trim().parse::<i64>().ok().map(|i| i.to_string()),
            (ParamType::Float, Value::Number(n)) => n.as_f64().map(render_float),
            (ParamType::Float, Value::String(s)) => s
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|f| f.is_finite())
                .map(render_float),
            (ParamType::Bool, Value::Bool(b)) => Some(b.to_string()),
            (ParamType::Bool, Value::String(s)) => match s.trim() {
                "true" => Some("true".into()),
                "false" => Some("false".into()),
                _ => None,
            },
            _ => None,
        }
    }
}

fn render_float(f: f64) -> String {
    Value::from(f).to_string()
}

impl fmt::Display for ParamType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A typed skill parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpec {
    pub name: String,
    #[serde(rename = "type")]
    pub param_type: ParamType,
    #[serde(default)]
    pub description: String,
    pub required: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<Value>,
}

/// One step of a skill's action program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionStep {
    pub guidance: String,
    pub action_type: ActionType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element_ref: Option<ElementRef>,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
}

impl ActionStep {
    pub fn param(&self, key: &str) -> Option<&Value> {
        self.params.get(key)
    }

    /// Param rendered as plain text; strings are unquoted.
    pub fn param_text(&self, key: &str) -> Option<String> {
        self.params.get(key).map(scalar_text)
    }

    /// Placeholder names referenced anywhere in this step's params.
    pub fn placeholder_names(&self) -> BTreeSet<String> {
        self.params
            .values()
            .filter_map(Value::as_str)
            .flat_map(placeholders)
            .map(str::to_owned)
            .collect()
    }
}

/// Text form of a scalar JSON value: strings are unquoted.
pub fn scalar_text(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// A named, parameterized action program with per-step guidance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Value")]
pub struct Skill {
    pub name: String,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_url: Option<String>,
    pub meta_url: String,
    pub parameters: Vec<ParameterSpec>,
    pub action_steps: Vec<ActionStep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    /// Unknown record fields, preserved on round-trip.
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl TryFrom<Value> for Skill {
    type Error = SchemaError;

    fn try_from(value: Value) -> Result<Self, Self::Error> {
        parse_skill(&value)
    }
}

/// A schema violation, located by a JSON-path-like string.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {kind}")]
pub struct SchemaError {
    pub path: String,
    pub kind: SchemaErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaErrorKind {
    #[error("not a JSON object")]
    NotAnObject,
    #[error("missing required field {0}")]
    MissingField(&'static str),
    #[error("expected {0}")]
    WrongType(&'static str),
    #[error("invalid skill name {0:?} (must be snake_case)")]
    InvalidName(String),
    #[error("invalid parameter name {0:?}")]
    InvalidParamName(String),
    #[error("duplicate parameter {0}")]
    DuplicateParam(String),
    #[error("unknown parameter type {0:?}")]
    UnknownParamType(String),
    #[error("default does not match declared type {0}")]
    DefaultTypeMismatch(ParamType),
    #[error("action_steps must not be empty")]
    NoSteps,
    #[error("unknown action_type {0:?}")]
    UnknownActionType(String),
    #[error("guidance must not be empty")]
    EmptyGuidance,
    #[error("element_ref is required for {0}")]
    ElementRefRequired(ActionType),
    #[error("element_ref is not allowed for {0}")]
    ElementRefForbidden(ActionType),
    #[error("tag_name must be non-empty lowercase")]
    InvalidTagName,
    #[error("attribute key {0:?} must be lowercase")]
    AttributeKeyCase(String),
    #[error("param {key:?} is not allowed for {action}")]
    ParamNotAllowed { key: String, action: ActionType },
    #[error("param value must be a scalar")]
    NonScalarParam,
    #[error("unhoused placeholder {0}")]
    UnhousedPlaceholder(String),
    #[error("orphan parameter {0} is not referenced by any step")]
    OrphanParameter(String),
    #[error("invalid meta_url pattern: {0}")]
    InvalidMetaUrl(String),
}

fn err(path: impl Into<String>, kind: SchemaErrorKind) -> SchemaError {
    SchemaError {
        path: path.into(),
        kind,
    }
}

fn get_str<'a>(
    obj: &'a Map<String, Value>,
    key: &'static str,
    path: &str,
) -> Result<&'a str, SchemaError> {
    match obj.get(key) {
        None | Some(Value::Null) => Err(err(path, SchemaErrorKind::MissingField(key))),
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(err(format!("{path}.{key}"), SchemaErrorKind::WrongType("string"))),
    }
}

fn get_opt_str(
    obj: &Map<String, Value>,
    key: &'static str,
    path: &str,
) -> Result<Option<String>, SchemaError> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(err(format!("{path}.{key}"), SchemaErrorKind::WrongType("string"))),
    }
}

fn get_array<'a>(
    obj: &'a Map<String, Value>,
    key: &'static str,
    path: &str,
) -> Result<&'a Vec<Value>, SchemaError> {
    match obj.get(key) {
        None | Some(Value::Null) => Err(err(path, SchemaErrorKind::MissingField(key))),
        Some(Value::Array(a)) => Ok(a),
        Some(_) => Err(err(format!("{path}.{key}"), SchemaErrorKind::WrongType("array"))),
    }
}

const KNOWN_SKILL_FIELDS: [&str; 7] = [
    "name",
    "description",
    "start_url",
    "meta_url",
    "parameters",
    "action_steps",
    "category",
];

/// Parses and validates one skill record.
pub fn parse_skill(document: &Value) -> Result<Skill, SchemaError> {
    let root = "skill";
    let obj = document
        .as_object()
        .ok_or_else(|| err(root, SchemaErrorKind::NotAnObject))?;

    let name = get_str(obj, "name", root)?;
    if !skill_name_re().is_match(name) {
        return Err(err("skill.name", SchemaErrorKind::InvalidName(name.into())));
    }
    let description = get_str(obj, "description", root)?.to_owned();
    let start_url = get_opt_str(obj, "start_url", root)?;
    let meta_url = get_str(obj, "meta_url", root)?;
    UrlPattern::new(meta_url)
        .map_err(|e| err("skill.meta_url", SchemaErrorKind::InvalidMetaUrl(e.to_string())))?;
    let category = get_opt_str(obj, "category", root)?;

    let mut parameters = Vec::new();
    for (i, p) in get_array(obj, "parameters", root)?.iter().enumerate() {
        let spec = parse_parameter(p, &format!("skill.parameters[{i}]"))?;
        if parameters.iter().any(|q: &ParameterSpec| q.name == spec.name) {
            return Err(err(
                format!("skill.parameters[{i}].name"),
                SchemaErrorKind::DuplicateParam(spec.name),
            ));
        }
        parameters.push(spec);
    }

    let raw_steps = get_array(obj, "action_steps", root)?;
    if raw_steps.is_empty() {
        return Err(err("skill.action_steps", SchemaErrorKind::NoSteps));
    }
    let mut action_steps = Vec::with_capacity(raw_steps.len());
    for (i, s) in raw_steps.iter().enumerate() {
        action_steps.push(parse_step(s, &format!("skill.action_steps[{i}]"))?);
    }

    let declared: BTreeSet<&str> = parameters.iter().map(|p| p.name.as_str()).collect();
    let mut referenced = BTreeSet::new();
    for (i, step) in action_steps.iter().enumerate() {
        for (key, value) in &step.params {
            if let Some(text) = value.as_str() {
                for ph in placeholders(text) {
                    if !declared.contains(ph) {
                        return Err(err(
                            format!("skill.action_steps[{i}].params.{key}"),
                            SchemaErrorKind::UnhousedPlaceholder(ph.into()),
                        ));
                    }
                    referenced.insert(ph.to_owned());
                }
            }
        }
    }
    for (i, p) in parameters.iter().enumerate() {
        if !referenced.contains(&p.name) {
            return Err(err(
                format!("skill.parameters[{i}]"),
                SchemaErrorKind::OrphanParameter(p.name.clone()),
            ));
        }
    }

    let extra = obj
        .iter()
        .filter(|(k, _)| !KNOWN_SKILL_FIELDS.contains(&k.as_str()))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();

    Ok(Skill {
        name: name.to_owned(),
        description,
        start_url,
        meta_url: meta_url.to_owned(),
        parameters,
        action_steps,
        category,
        extra,
    })
}

fn parse_parameter(value: &Value, path: &str) -> Result<ParameterSpec, SchemaError> {
    let obj = value
        .as_object()
        .ok_or_else(|| err(path, SchemaErrorKind::NotAnObject))?;
    let name = get_str(obj, "name", path)?;
    if !ident_re().is_match(name) {
        return Err(err(
            format!("{path}.name"),
            SchemaErrorKind::InvalidParamName(name.into()),
        ));
    }
    let type_str = get_str(obj, "type", path)?;
    let param_type = ParamType::parse(type_str).ok_or_else(|| {
        err(
            format!("{path}.type"),
            SchemaErrorKind::UnknownParamType(type_str.into()),
        )
    })?;
    let description = get_opt_str(obj, "description", path)?.unwrap_or_default();
    let required = match obj.get("required") {
        None | Some(Value::Null) => return Err(err(path, SchemaErrorKind::MissingField("required"))),
        Some(Value::Bool(b)) => *b,
        Some(_) => {
            return Err(err(
                format!("{path}.required"),
                SchemaErrorKind::WrongType("boolean"),
            ))
        }
    };
    let default = match obj.get("default") {
        None | Some(Value::Null) => None,
        Some(v) => {
            if param_type.render(v).is_none() {
                return Err(err(
                    format!("{path}.default"),
                    SchemaErrorKind::DefaultTypeMismatch(param_type),
                ));
            }
            Some(v.clone())
        }
    };
    Ok(ParameterSpec {
        name: name.to_owned(),
        param_type,
        description,
        required,
        default,
    })
}

fn parse_step(value: &Value, path: &str) -> Result<ActionStep, SchemaError> {
    let obj = value
        .as_object()
        .ok_or_else(|| err(path, SchemaErrorKind::NotAnObject))?;
    let guidance = get_str(obj, "guidance", path)?;
    if guidance.trim().is_empty() {
        return Err(err(format!("{path}.guidance"), SchemaErrorKind::EmptyGuidance));
    }
    let type_str = get_str(obj, "action_type", path)?;
    let action_type = ActionType::parse(type_str).ok_or_else(|| {
        err(
            format!("{path}.action_type"),
            SchemaErrorKind::UnknownActionType(type_str.into()),
        )
    })?;

    let element_ref = match obj.get("element_ref") {
        None | Some(Value::Null) => None,
        Some(v) => Some(parse_element_ref(v, &format!("{path}.element_ref"))?),
    };
    match (action_type.requires_element(), element_ref.is_some()) {
        (true, false) => {
            return Err(err(path, SchemaErrorKind::ElementRefRequired(action_type)));
        }
        (false, true) => {
            return Err(err(
                format!("{path}.element_ref"),
                SchemaErrorKind::ElementRefForbidden(action_type),
            ));
        }
        _ => {}
    }

    let mut params = BTreeMap::new();
    match obj.get("params") {
        None | Some(Value::Null) => {}
        Some(Value::Object(map)) => {
            let allowed = action_type.allowed_params();
            for (k, v) in map {
                if !allowed.contains(&k.as_str()) {
                    return Err(err(
                        format!("{path}.params.{k}"),
                        SchemaErrorKind::ParamNotAllowed {
                            key: k.clone(),
                            action: action_type,
                        },
                    ));
                }
                if !matches!(v, Value::String(_) | Value::Number(_) | Value::Bool(_)) {
                    return Err(err(format!("{path}.params.{k}"), SchemaErrorKind::NonScalarParam));
                }
                params.insert(k.clone(), v.clone());
            }
        }
        Some(_) => {
            return Err(err(format!("{path}.params"), SchemaErrorKind::WrongType("object")));
        }
    }

    Ok(ActionStep {
        guidance: guidance.to_owned(),
        action_type,
        element_ref,
        params,
    })
}

fn parse_element_ref(value: &Value, path: &str) -> Result<ElementRef, SchemaError> {
    let obj = value
        .as_object()
        .ok_or_else(|| err(path, SchemaErrorKind::NotAnObject))?;
    let tag_name = get_str(obj, "tag_name", path)?;
    if tag_name.is_empty() || tag_name.chars().any(|c| c.is_uppercase()) {
        return Err(err(format!("{path}.tag_name"), SchemaErrorKind::InvalidTagName));
    }
    let text_content = get_opt_str(obj, "text_content", path)?;
    let mut attributes = BTreeMap::new();
    match obj.get("attributes") {
        None | Some(Value::Null) => {}
        Some(Value::Object(map)) => {
            for (k, v) in map {
                if k.chars().any(|c| c.is_uppercase()) {
                    return Err(err(
                        format!("{path}.attributes"),
                        SchemaErrorKind::AttributeKeyCase(k.clone()),
                    ));
                }
                let v = match v {
                    Value::String(s) => s.clone(),
                    Value::Number(_) | Value::Bool(_) => v.to_string(),
                    _ => {
                        return Err(err(
                            format!("{path}.attributes.{k}"),
                            SchemaErrorKind::WrongType("string"),
                        ))
                    }
                };
                attributes.insert(k.clone(), v);
            }
        }
        Some(_) => {
            return Err(err(
                format!("{path}.attributes"),
                SchemaErrorKind::WrongType("object"),
            ))
        }
    }
    Ok(ElementRef {
        tag_name: tag_name.to_owned(),
        text_content,
        attributes,
    })
}

/// Errors raised while binding call arguments to a skill's parameters.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstitutionError {
    #[error("missing required argument: {0}")]
    MissingRequired(String),
    #[error("missing argument: {0} (optional parameter without default)")]
    MissingOptional(String),
    #[error("unknown argument: {0}")]
    UnknownArgument(String),
    #[error("type mismatch for {name}: expected {expected}, got {got}")]
    TypeMismatch {
        name: String,
        expected: ParamType,
        got: String,
    },
    #[error("argument {0} contains placeholder syntax")]
    PlaceholderInArgument(String),
}

impl Skill {
    /// Parses a skill from JSON text.
    pub fn from_json(text: &str) -> Result<Self, SkillFileError> {
        let value: Value = serde_json::from_str(text)?;
        Ok(parse_skill(&value)?)
    }

    pub fn parameter(&self, name: &str) -> Option<&ParameterSpec> {
        self.parameters.iter().find(|p| p.name == name)
    }

    /// Resolves every `{{x}}` placeholder in step params against `args`,
    /// falling back to parameter defaults.
    pub fn substitute_params(
        &self,
        args: &Map<String, Value>,
    ) -> Result<Vec<ActionStep>, SubstitutionError> {
        if let Some(unknown) = args.keys().find(|k| self.parameter(k).is_none()) {
            return Err(SubstitutionError::UnknownArgument(unknown.clone()));
        }
        let mut bound = BTreeMap::new();
        for p in &self.parameters {
            let value = match args.get(&p.name).filter(|v| !v.is_null()) {
                Some(v) => v,
                None => match &p.default {
                    Some(d) => d,
                    None if p.required => {
                        return Err(SubstitutionError::MissingRequired(p.name.clone()))
                    }
                    None => return Err(SubstitutionError::MissingOptional(p.name.clone())),
                },
            };
            let text = p
                .param_type
                .render(value)
                .ok_or_else(|| SubstitutionError::TypeMismatch {
                    name: p.name.clone(),
                    expected: p.param_type,
                    got: value.to_string(),
                })?;
            if placeholders(&text).next().is_some() {
                return Err(SubstitutionError::PlaceholderInArgument(p.name.clone()));
            }
            bound.insert(p.name.as_str(), text);
        }

        let resolved = self
            .action_steps
            .iter()
            .map(|step| {
                let mut step = step.clone();
                for value in step.params.values_mut() {
                    if let Value::String(s) = value {
                        let replaced = placeholder_re().replace_all(s, |c: &regex::Captures| {
                            // Every placeholder is housed; validated at parse time.
                            bound.get(&c[1]).cloned().unwrap_or_default()
                        });
                        if let std::borrow::Cow::Owned(r) = replaced {
                            *s = r;
                        }
                    }
                }
                step
            })
            .collect();
        Ok(resolved)
    }

    /// Number of state-mutating steps.
    pub fn interactive_op_count(&self) -> usize {
        self.action_steps
            .iter()
            .filter(|s| s.action_type.is_interactive())
            .count()
    }

    /// The first element reference in step order, if any.
    pub fn first_element_ref(&self) -> Option<&ElementRef> {
        self.action_steps.iter().find_map(|s| s.element_ref.as_ref())
    }

    pub fn action_types(&self) -> impl Iterator<Item = ActionType> + '_ {
        self.action_steps.iter().map(|s| s.action_type)
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("skill serializes")
    }
}

#[derive(Debug, Error)]
pub enum SkillFileError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("unsupported library version {0}")]
    Version(u64),
    #[error("library document is missing {0}")]
    Missing(&'static str),
    #[error("duplicate skill name {0}")]
    DuplicateName(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// The on-disk skill library document: `{"version": 1, "skills": [...]}`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SkillLibraryFile {
    pub skills: Vec<Skill>,
}

impl SkillLibraryFile {
    pub fn new(skills: Vec<Skill>) -> Self {
        Self { skills }
    }

    pub fn from_json(text: &str) -> Result<Self, SkillFileError> {
        let value: Value = serde_json::from_str(text)?;
        let obj = value.as_object().ok_or(SkillFileError::Missing("an object root"))?;
        let version = obj
            .get("version")
            .and_then(Value::as_u64)
            .ok_or(SkillFileError::Missing("version"))?;
        if version != LIBRARY_FORMAT_VERSION {
            return Err(SkillFileError::Version(version));
        }
        let raw = obj
            .get("skills")
            .and_then(Value::as_array)
            .ok_or(SkillFileError::Missing("skills"))?;
        let mut skills: Vec<Skill> = Vec::with_capacity(raw.len());
        for (i, s) in raw.iter().enumerate() {
            let skill = parse_skill(s).map_err(|mut e| {
                e.path = e.path.replacen("skill", &format!("skills[{i}]"), 1);
                e
            })?;
            if skills.iter().any(|k| k.name == skill.name) {
                return Err(SkillFileError::DuplicateName(skill.name));
            }
            skills.push(skill);
        }
        Ok(Self { skills })
    }

    /// Pretty JSON with a trailing newline; byte-stable for equal libraries.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            version: u64,
            skills: &'a [Skill],
        }
        let mut out = serde_json::to_string_pretty(&Doc {
            version: LIBRARY_FORMAT_VERSION,
            skills: &self.skills,
        })
        .expect("library serializes");
        out.push('\n');
        out
    }

    pub fn load(path: &std::path::Path) -> Result<Self, SkillFileError> {
        let text = std::fs::read_to_string(path).map_err(|source| SkillFileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), SkillFileError> {
        std::fs::write(path, self.to_json()).map_err(|source| SkillFileError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}
