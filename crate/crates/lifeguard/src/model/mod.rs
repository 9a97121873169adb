//! Declarative app model: the document format that stands in for an APK.
//!
//! An [`AppModel`] describes activities, their widget trees, and the handler
//! programs attached to lifecycle callbacks and widget events. Models are
//! immutable after parsing and safe to share across threads.

mod parse;
mod validate;

pub use parse::{parse_app_model, to_json_string, ParseError};
pub use validate::{validate, Diagnostic, DiagnosticCode};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Widget properties that describe screen geometry rather than app state.
/// These are never part of the oracle scope.
pub const GEOMETRY_PROPERTIES: &[&str] = &[
    "bounds", "x", "y", "width", "height", "left", "top", "right", "bottom",
];

/// Statement budget for a single event dispatch; exceeding it raises a hang error.
pub const STEP_LIMIT: u64 = 10_000;

/// A complete declarative app: activities, launcher, and initial preferences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppModel {
    pub app_id: String,
    pub launcher: String,
    pub initial_prefs: BTreeMap<String, String>,
    pub activities: Vec<ActivityModel>,
}

impl AppModel {
    pub fn activity(&self, id: &str) -> Option<&ActivityModel> {
        self.activities.iter().find(|a| a.id == id)
    }
}

/// One app page: a widget tree plus handler programs keyed by callback or widget event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivityModel {
    pub id: String,
    pub widgets: Vec<WidgetModel>,
    pub handlers: BTreeMap<HandlerKey, HandlerProgram>,
}

impl ActivityModel {
    pub fn widget(&self, id: &str) -> Option<&WidgetModel> {
        self.widgets.iter().find(|w| w.id == id)
    }

    pub fn handler(&self, key: &HandlerKey) -> Option<&HandlerProgram> {
        self.handlers.get(key)
    }
}

/// A widget declaration with its layout-default property values.
///
/// `app_relevant` is the set of property names the oracles may compare;
/// geometry properties are excluded from it by validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WidgetModel {
    pub id: String,
    pub type_name: String,
    pub kind: WidgetKind,
    pub properties: BTreeMap<String, String>,
    pub app_relevant: BTreeSet<String>,
}

impl WidgetModel {
    /// The property a user edits directly: "text" for has-text widgets,
    /// "checked" for no-text editable widgets, none otherwise.
    pub fn designated_property(&self) -> Option<&'static str> {
        match self.kind {
            WidgetKind::EditableHasText => Some("text"),
            WidgetKind::EditableNoText => Some("checked"),
            WidgetKind::NonEditable => None,
        }
    }

    pub fn is_editable(&self) -> bool {
        !matches!(self.kind, WidgetKind::NonEditable)
    }
}

/// Editability class of a widget type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WidgetKind {
    /// The user types a text value (EditText, AutoCompleteTextView, Spinner).
    EditableHasText,
    /// The user toggles a checked value (CheckBox, RadioButton, CheckedTextView, Switch).
    EditableNoText,
    /// Everything else; the user cannot edit its value directly.
    NonEditable,
}

/// Classify a widget type name into its editability kind.
///
/// Matching is case-sensitive and total: unknown names are non-editable.
pub fn classify_widget_kind(type_name: &str) -> WidgetKind {
    match type_name {
        "EditText" | "AutoCompleteTextView" | "Spinner" => WidgetKind::EditableHasText,
        "CheckBox" | "RadioButton" | "CheckedTextView" | "Switch" => WidgetKind::EditableNoText,
        _ => WidgetKind::NonEditable,
    }
}

/// Lifecycle callbacks an activity can implement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CallbackKind {
    OnCreate,
    OnPause,
    OnResume,
    OnStop,
    OnDestroy,
    OnSaveInstanceState,
    OnRestoreInstanceState,
}

impl CallbackKind {
    pub fn name(self) -> &'static str {
        match self {
            CallbackKind::OnCreate => "onCreate",
            CallbackKind::OnPause => "onPause",
            CallbackKind::OnResume => "onResume",
            CallbackKind::OnStop => "onStop",
            CallbackKind::OnDestroy => "onDestroy",
            CallbackKind::OnSaveInstanceState => "onSaveInstanceState",
            CallbackKind::OnRestoreInstanceState => "onRestoreInstanceState",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "onCreate" => CallbackKind::OnCreate,
            "onPause" => CallbackKind::OnPause,
            "onResume" => CallbackKind::OnResume,
            "onStop" => CallbackKind::OnStop,
            "onDestroy" => CallbackKind::OnDestroy,
            "onSaveInstanceState" => CallbackKind::OnSaveInstanceState,
            "onRestoreInstanceState" => CallbackKind::OnRestoreInstanceState,
            _ => return None,
        })
    }
}

/// Key into an activity's handler table: a lifecycle callback or a widget event.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HandlerKey {
    Callback(CallbackKind),
    /// Fires when the widget is tapped.
    Tap(String),
    /// Fires after the widget's value changes (set_text or toggle).
    TextChanged(String),
}

impl fmt::Display for HandlerKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HandlerKey::Callback(kind) => f.write_str(kind.name()),
            HandlerKey::Tap(w) => write!(f, "tap:{w}"),
            HandlerKey::TextChanged(w) => write!(f, "text_changed:{w}"),
        }
    }
}

impl HandlerKey {
    pub fn parse(key: &str) -> Option<Self> {
        if let Some(kind) = CallbackKind::from_name(key) {
            return Some(HandlerKey::Callback(kind));
        }
        if let Some(w) = key.strip_prefix("tap:") {
            return Some(HandlerKey::Tap(w.to_string()));
        }
        if let Some(w) = key.strip_prefix("text_changed:") {
            return Some(HandlerKey::TextChanged(w.to_string()));
        }
        None
    }

    /// Widget the key refers to, if it is a widget-event key.
    pub fn widget(&self) -> Option<&str> {
        match self {
            HandlerKey::Tap(w) | HandlerKey::TextChanged(w) => Some(w),
            HandlerKey::Callback(_) => None,
        }
    }
}

/// A straight-line handler program. No loops, no branches.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HandlerProgram {
    pub statements: Vec<Statement>,
}

/// Storage tier a `restore` statement reads from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StoreKind {
    /// Preferences; survive kill and relaunch.
    Prefs,
    /// Per-activity session store; survives back and rotate within one run.
    Session,
    /// The instance-state bundle delivered on recreation after rotation.
    Instance,
}

impl StoreKind {
    pub fn name(self) -> &'static str {
        match self {
            StoreKind::Prefs => "prefs",
            StoreKind::Session => "session",
            StoreKind::Instance => "instance",
        }
    }
}

/// One statement of the handler IR.
///
/// `SinkCall` is the general API-call form: persistence sinks are recognized
/// by the static analysis, and a small set of storage APIs has engine
/// semantics (preference, session, and instance-state writes). `Restore` is
/// the guarded inverse: it copies a stored value into a widget property only
/// when the key is present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    Assign {
        var: String,
        value: Expression,
    },
    WidgetWrite {
        widget: String,
        property: String,
        value: Expression,
    },
    WidgetRead {
        var: String,
        widget: String,
        property: String,
    },
    SinkCall {
        class: String,
        method: String,
        args: Vec<Expression>,
    },
    Restore {
        store: StoreKind,
        key: Expression,
        widget: String,
        property: String,
    },
    Navigate {
        activity: String,
    },
    Finish,
    ShowDialog {
        dialog: String,
    },
    DismissDialog {
        dialog: String,
    },
    Crash {
        message: String,
    },
    Noop,
}

/// Expressions: string values built from literals, locals, and widget reads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expression {
    Literal(String),
    VarRef(String),
    WidgetRef { widget: String, property: String },
    Concat(Box<Expression>, Box<Expression>),
}

impl Expression {
    pub fn literal(s: impl Into<String>) -> Self {
        Expression::Literal(s.into())
    }

    pub fn var(name: impl Into<String>) -> Self {
        Expression::VarRef(name.into())
    }

    pub fn widget(widget: impl Into<String>, property: impl Into<String>) -> Self {
        Expression::WidgetRef {
            widget: widget.into(),
            property: property.into(),
        }
    }

    pub fn concat(left: Expression, right: Expression) -> Self {
        Expression::Concat(Box::new(left), Box::new(right))
    }

    /// Local variables read by this expression.
    pub fn referenced_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expression::Literal(_) => {}
            Expression::VarRef(name) => out.push(name),
            Expression::WidgetRef { .. } => {}
            Expression::Concat(l, r) => {
                l.referenced_vars(out);
                r.referenced_vars(out);
            }
        }
    }

    /// Widgets read by this expression, with the property accessed.
    pub fn referenced_widgets<'a>(&'a self, out: &mut Vec<(&'a str, &'a str)>) {
        match self {
            Expression::Literal(_) | Expression::VarRef(_) => {}
            Expression::WidgetRef { widget, property } => out.push((widget, property)),
            Expression::Concat(l, r) => {
                l.referenced_widgets(out);
                r.referenced_widgets(out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn editable_has_text_rows() {
        for name in ["EditText", "AutoCompleteTextView", "Spinner"] {
            assert_eq!(classify_widget_kind(name), WidgetKind::EditableHasText);
        }
    }

    #[test]
    fn editable_no_text_rows() {
        for name in ["CheckBox", "RadioButton", "CheckedTextView", "Switch"] {
            assert_eq!(classify_widget_kind(name), WidgetKind::EditableNoText);
        }
    }

    #[test]
    fn everything_else_is_non_editable() {
        for name in ["TextView", "Button", "ImageView", "edittext", "", "View"] {
            assert_eq!(classify_widget_kind(name), WidgetKind::NonEditable);
        }
    }

    #[test]
    fn handler_key_round_trips_through_display() {
        let keys = [
            HandlerKey::Callback(CallbackKind::OnCreate),
            HandlerKey::Callback(CallbackKind::OnRestoreInstanceState),
            HandlerKey::Tap("go".into()),
            HandlerKey::TextChanged("name".into()),
        ];
        for key in keys {
            assert_eq!(HandlerKey::parse(&key.to_string()), Some(key));
        }
        assert_eq!(HandlerKey::parse("onFling"), None);
    }
}
