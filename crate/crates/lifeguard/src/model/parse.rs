//! Parsing and serialization of the app-model JSON document format.
//!
//! The on-disk shape is described by `schema/app_model.schema.json`. Parsing
//! is total over valid documents: syntax errors carry line/column, schema
//! errors name the offending field, and reference errors name the dangling id.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    classify_widget_kind, ActivityModel, AppModel, Expression, HandlerKey, HandlerProgram,
    Statement, StoreKind, WidgetModel, GEOMETRY_PROPERTIES,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("schema error: {message}")]
    Schema { message: String },
    #[error("reference error: unknown {kind} \"{id}\" in {context}")]
    Reference {
        kind: &'static str,
        id: String,
        context: String,
    },
}

/// Parse an app-model document into a fully resolved [`AppModel`].
///
/// Widget kinds are derived from the declared type names; when a widget omits
/// `app_relevant` it defaults to all declared properties minus geometry ones.
pub fn parse_app_model(text: &str) -> Result<AppModel, ParseError> {
    let doc: AppModelDoc = serde_json::from_str(text).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => ParseError::Schema {
            message: e.to_string(),
        },
        _ => ParseError::Syntax {
            line: e.line(),
            col: e.column(),
            message: e.to_string(),
        },
    })?;
    resolve(doc)
}

/// Serialize a model back to its document form. `parse_app_model` of the
/// result reproduces the model exactly.
pub fn to_json_string(model: &AppModel) -> String {
    let doc = AppModelDoc::from_model(model);
    let mut out = serde_json::to_string_pretty(&doc).expect("model serialization cannot fail");
    out.push('\n');
    out
}

fn resolve(doc: AppModelDoc) -> Result<AppModel, ParseError> {
    let activity_ids: BTreeSet<&str> = doc.activities.iter().map(|a| a.id.as_str()).collect();
    if !activity_ids.contains(doc.launcher.as_str()) {
        return Err(ParseError::Reference {
            kind: "activity",
            id: doc.launcher.clone(),
            context: "launcher".to_string(),
        });
    }

    let mut activities = Vec::with_capacity(doc.activities.len());
    for activity_doc in doc.activities {
        let widget_ids: BTreeSet<&str> =
            activity_doc.widgets.iter().map(|w| w.id.as_str()).collect();

        let widgets = activity_doc
            .widgets
            .into_iter()
            .map(WidgetDoc::into_widget)
            .collect::<Vec<_>>();

        let mut handlers = BTreeMap::new();
        for (raw_key, statements) in activity_doc.handlers {
            let key = HandlerKey::parse(&raw_key).ok_or_else(|| ParseError::Schema {
                message: format!(
                    "activity \"{}\": unknown handler key \"{raw_key}\"",
                    activity_doc.id
                ),
            })?;
            if let Some(widget) = key.widget() {
                if !widget_ids.contains(widget) {
                    return Err(ParseError::Reference {
                        kind: "widget",
                        id: widget.to_string(),
                        context: format!("activity \"{}\" handler \"{raw_key}\"", activity_doc.id),
                    });
                }
            }
            let program = HandlerProgram {
                statements: statements
                    .into_iter()
                    .map(StatementDoc::into_statement)
                    .collect(),
            };
            check_references(&activity_doc.id, &raw_key, &program, &widget_ids, &activity_ids)?;
            handlers.insert(key, program);
        }

        activities.push(ActivityModel {
            id: activity_doc.id,
            widgets,
            handlers,
        });
    }

    Ok(AppModel {
        app_id: doc.app_id,
        launcher: doc.launcher,
        initial_prefs: doc.initial_prefs,
        activities,
    })
}

fn check_references(
    activity: &str,
    handler: &str,
    program: &HandlerProgram,
    widget_ids: &BTreeSet<&str>,
    activity_ids: &BTreeSet<&str>,
) -> Result<(), ParseError> {
    let context = |detail: &str| format!("activity \"{activity}\" handler \"{handler}\" {detail}");
    let check_widget = |id: &str, detail: &str| -> Result<(), ParseError> {
        if widget_ids.contains(id) {
            Ok(())
        } else {
            Err(ParseError::Reference {
                kind: "widget",
                id: id.to_string(),
                context: context(detail),
            })
        }
    };
    let check_expr = |expr: &Expression, detail: &str| -> Result<(), ParseError> {
        let mut refs = Vec::new();
        expr.referenced_widgets(&mut refs);
        for (w, _) in refs {
            check_widget(w, detail)?;
        }
        Ok(())
    };

    for statement in &program.statements {
        match statement {
            Statement::Assign { value, .. } => check_expr(value, "assign")?,
            Statement::WidgetWrite { widget, value, .. } => {
                check_widget(widget, "widget_write")?;
                check_expr(value, "widget_write")?;
            }
            Statement::WidgetRead { widget, .. } => check_widget(widget, "widget_read")?,
            Statement::SinkCall { args, .. } => {
                for arg in args {
                    check_expr(arg, "sink_call")?;
                }
            }
            Statement::Restore { key, widget, .. } => {
                check_widget(widget, "restore")?;
                check_expr(key, "restore")?;
            }
            Statement::Navigate { activity: target } => {
                if !activity_ids.contains(target.as_str()) {
                    return Err(ParseError::Reference {
                        kind: "activity",
                        id: target.clone(),
                        context: context("navigate"),
                    });
                }
            }
            Statement::Finish
            | Statement::ShowDialog { .. }
            | Statement::DismissDialog { .. }
            | Statement::Crash { .. }
            | Statement::Noop => {}
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Document shapes (serde-facing)
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AppModelDoc {
    app_id: String,
    launcher: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    initial_prefs: BTreeMap<String, String>,
    activities: Vec<ActivityDoc>,
}

impl AppModelDoc {
    fn from_model(model: &AppModel) -> Self {
        AppModelDoc {
            app_id: model.app_id.clone(),
            launcher: model.launcher.clone(),
            initial_prefs: model.initial_prefs.clone(),
            activities: model
                .activities
                .iter()
                .map(|a| ActivityDoc {
                    id: a.id.clone(),
                    widgets: a.widgets.iter().map(WidgetDoc::from_widget).collect(),
                    handlers: a
                        .handlers
                        .iter()
                        .map(|(key, program)| {
                            (
                                key.to_string(),
                                program
                                    .statements
                                    .iter()
                                    .map(StatementDoc::from_statement)
                                    .collect(),
                            )
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActivityDoc {
    id: String,
    #[serde(default)]
    widgets: Vec<WidgetDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    handlers: BTreeMap<String, Vec<StatementDoc>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WidgetDoc {
    id: String,
    #[serde(rename = "type")]
    type_name: String,
    #[serde(default)]
    properties: BTreeMap<String, String>,
    /// Defaults to all declared properties minus geometry ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    app_relevant: Option<Vec<String>>,
}

impl WidgetDoc {
    fn into_widget(self) -> WidgetModel {
        let kind = classify_widget_kind(&self.type_name);
        let app_relevant: BTreeSet<String> = match self.app_relevant {
            Some(list) => list.into_iter().collect(),
            None => self
                .properties
                .keys()
                .filter(|p| !GEOMETRY_PROPERTIES.contains(&p.as_str()))
                .cloned()
                .collect(),
        };
        WidgetModel {
            id: self.id,
            type_name: self.type_name,
            kind,
            properties: self.properties,
            app_relevant,
        }
    }

    fn from_widget(widget: &WidgetModel) -> Self {
        WidgetDoc {
            id: widget.id.clone(),
            type_name: widget.type_name.clone(),
            properties: widget.properties.clone(),
            app_relevant: Some(widget.app_relevant.iter().cloned().collect()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
enum StatementDoc {
    Assign {
        var: String,
        value: ExpressionDoc,
    },
    WidgetWrite {
        widget: String,
        property: String,
        value: ExpressionDoc,
    },
    WidgetRead {
        var: String,
        widget: String,
        property: String,
    },
    SinkCall {
        class: String,
        method: String,
        #[serde(default)]
        args: Vec<ExpressionDoc>,
    },
    Restore {
        store: StoreKindDoc,
        key: ExpressionDoc,
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

impl StatementDoc {
    fn into_statement(self) -> Statement {
        match self {
            StatementDoc::Assign { var, value } => Statement::Assign {
                var,
                value: value.into_expression(),
            },
            StatementDoc::WidgetWrite {
                widget,
                property,
                value,
            } => Statement::WidgetWrite {
                widget,
                property,
                value: value.into_expression(),
            },
            StatementDoc::WidgetRead {
                var,
                widget,
                property,
            } => Statement::WidgetRead {
                var,
                widget,
                property,
            },
            StatementDoc::SinkCall {
                class,
                method,
                args,
            } => Statement::SinkCall {
                class,
                method,
                args: args.into_iter().map(ExpressionDoc::into_expression).collect(),
            },
            StatementDoc::Restore {
                store,
                key,
                widget,
                property,
            } => Statement::Restore {
                store: store.into(),
                key: key.into_expression(),
                widget,
                property,
            },
            StatementDoc::Navigate { activity } => Statement::Navigate { activity },
            StatementDoc::Finish => Statement::Finish,
            StatementDoc::ShowDialog { dialog } => Statement::ShowDialog { dialog },
            StatementDoc::DismissDialog { dialog } => Statement::DismissDialog { dialog },
            StatementDoc::Crash { message } => Statement::Crash { message },
            StatementDoc::Noop => Statement::Noop,
        }
    }

    fn from_statement(statement: &Statement) -> Self {
        match statement {
            Statement::Assign { var, value } => StatementDoc::Assign {
                var: var.clone(),
                value: ExpressionDoc::from_expression(value),
            },
            Statement::WidgetWrite {
                widget,
                property,
                value,
            } => StatementDoc::WidgetWrite {
                widget: widget.clone(),
                property: property.clone(),
                value: ExpressionDoc::from_expression(value),
            },
            Statement::WidgetRead {
                var,
                widget,
                property,
            } => StatementDoc::WidgetRead {
                var: var.clone(),
                widget: widget.clone(),
                property: property.clone(),
            },
            Statement::SinkCall {
                class,
                method,
                args,
            } => StatementDoc::SinkCall {
                class: class.clone(),
                method: method.clone(),
                args: args.iter().map(ExpressionDoc::from_expression).collect(),
            },
            Statement::Restore {
                store,
                key,
                widget,
                property,
            } => StatementDoc::Restore {
                store: (*store).into(),
                key: ExpressionDoc::from_expression(key),
                widget: widget.clone(),
                property: property.clone(),
            },
            Statement::Navigate { activity } => StatementDoc::Navigate {
                activity: activity.clone(),
            },
            Statement::Finish => StatementDoc::Finish,
            Statement::ShowDialog { dialog } => StatementDoc::ShowDialog {
                dialog: dialog.clone(),
            },
            Statement::DismissDialog { dialog } => StatementDoc::DismissDialog {
                dialog: dialog.clone(),
            },
            Statement::Crash { message } => StatementDoc::Crash {
                message: message.clone(),
            },
            Statement::Noop => StatementDoc::Noop,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum StoreKindDoc {
    Prefs,
    Session,
    Instance,
}

impl From<StoreKindDoc> for StoreKind {
    fn from(doc: StoreKindDoc) -> Self {
        match doc {
            StoreKindDoc::Prefs => StoreKind::Prefs,
            StoreKindDoc::Session => StoreKind::Session,
            StoreKindDoc::Instance => StoreKind::Instance,
        }
    }
}

impl From<StoreKind> for StoreKindDoc {
    fn from(kind: StoreKind) -> Self {
        match kind {
            StoreKind::Prefs => StoreKindDoc::Prefs,
            StoreKind::Session => StoreKindDoc::Session,
            StoreKind::Instance => StoreKindDoc::Instance,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ExpressionDoc {
    Literal {
        value: String,
    },
    Var {
        name: String,
    },
    Widget {
        widget: String,
        property: String,
    },
    Concat {
        left: Box<ExpressionDoc>,
        right: Box<ExpressionDoc>,
    },
}

impl ExpressionDoc {
    fn into_expression(self) -> Expression {
        match self {
            ExpressionDoc::Literal { value } => Expression::Literal(value),
            ExpressionDoc::Var { name } => Expression::VarRef(name),
            ExpressionDoc::Widget { widget, property } => {
                Expression::WidgetRef { widget, property }
            }
            ExpressionDoc::Concat { left, right } => Expression::Concat(
                Box::new(left.into_expression()),
                Box::new(right.into_expression()),
            ),
        }
    }

    fn from_expression(expr: &Expression) -> Self {
        match expr {
            Expression::Literal(value) => ExpressionDoc::Literal {
                value: value.clone(),
            },
            Expression::VarRef(name) => ExpressionDoc::Var { name: name.clone() },
            Expression::WidgetRef { widget, property } => ExpressionDoc::Widget {
                widget: widget.clone(),
                property: property.clone(),
            },
            Expression::Concat(left, right) => ExpressionDoc::Concat {
                left: Box::new(ExpressionDoc::from_expression(left)),
                right: Box::new(ExpressionDoc::from_expression(right)),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::WidgetKind;
    use super::*;

    const MINIMAL: &str = r#"{
        "app_id": "demo",
        "launcher": "main",
        "activities": [
            {
                "id": "main",
                "widgets": [
                    {"id": "title", "type": "TextView", "properties": {"text": "hi"}}
                ]
            }
        ]
    }"#;

    #[test]
    fn parses_minimal_document() {
        let model = parse_app_model(MINIMAL).unwrap();
        assert_eq!(model.activities.len(), 1);
        assert_eq!(model.launcher, "main");
        let widget = model.activity("main").unwrap().widget("title").unwrap();
        assert_eq!(widget.kind, WidgetKind::NonEditable);
        assert!(widget.app_relevant.contains("text"));
    }

    #[test]
    fn dangling_navigate_is_a_reference_error() {
        let text = r#"{
            "app_id": "demo",
            "launcher": "main",
            "activities": [
                {
                    "id": "main",
                    "widgets": [{"id": "go", "type": "Button", "properties": {"text": "Go"}}],
                    "handlers": {"tap:go": [{"op": "navigate", "activity": "ghost"}]}
                }
            ]
        }"#;
        match parse_app_model(text) {
            Err(ParseError::Reference { id, .. }) => assert_eq!(id, "ghost"),
            other => panic!("expected reference error, got {other:?}"),
        }
    }

    #[test]
    fn missing_field_is_a_schema_error() {
        let text = r#"{"app_id": "demo", "activities": []}"#;
        match parse_app_model(text) {
            Err(ParseError::Schema { message }) => assert!(message.contains("launcher")),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_json_reports_line_and_column() {
        match parse_app_model("{\n  \"app_id\": ") {
            Err(ParseError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn geometry_properties_default_out_of_scope() {
        let text = r#"{
            "app_id": "demo",
            "launcher": "main",
            "activities": [
                {
                    "id": "main",
                    "widgets": [
                        {"id": "box", "type": "EditText",
                         "properties": {"text": "", "bounds": "0,0,10,10"}}
                    ]
                }
            ]
        }"#;
        let model = parse_app_model(text).unwrap();
        let widget = model.activity("main").unwrap().widget("box").unwrap();
        assert!(widget.app_relevant.contains("text"));
        assert!(!widget.app_relevant.contains("bounds"));
    }

    #[test]
    fn serialize_then_parse_is_identity() {
        let model = parse_app_model(MINIMAL).unwrap();
        let text = to_json_string(&model);
        let reparsed = parse_app_model(&text).unwrap();
        assert_eq!(model, reparsed);
    }
}
