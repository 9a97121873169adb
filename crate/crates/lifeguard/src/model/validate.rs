//! Semantic validation of parsed app models.
//!
//! `parse_app_model` already rejects documents with dangling references; this
//! pass covers everything else a programmatically built model could violate.
//! An empty diagnostic list means every engine and analysis operation accepts
//! the model.

use std::collections::BTreeSet;
use std::fmt;

use super::{
    classify_widget_kind, AppModel, Expression, HandlerProgram, Statement, WidgetKind,
    GEOMETRY_PROPERTIES,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DiagnosticCode {
    EmptyActivityId,
    DuplicateActivityId,
    UnknownLauncher,
    DuplicateWidgetId,
    KindMismatch,
    MissingDesignatedProperty,
    EditablePropertyNotAppRelevant,
    AppRelevantUnknownProperty,
    GeometryPropertyInScope,
    UnknownHandlerWidget,
    UnknownWidget,
    UnknownProperty,
    UnknownNavigationTarget,
    UseBeforeDef,
    BadStoreArity,
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// One validation finding: a code, where it was found, and a human message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub location: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.code, self.location, self.message)
    }
}

/// Check every model invariant; returns an empty list iff all hold.
pub fn validate(model: &AppModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |code: DiagnosticCode, location: String, message: String| {
        out.push(Diagnostic {
            code,
            location,
            message,
        });
    };

    let mut seen_activities = BTreeSet::new();
    let activity_ids: BTreeSet<&str> = model.activities.iter().map(|a| a.id.as_str()).collect();

    if !activity_ids.contains(model.launcher.as_str()) {
        push(
            DiagnosticCode::UnknownLauncher,
            "launcher".to_string(),
            format!("launcher \"{}\" is not a declared activity", model.launcher),
        );
    }

    for activity in &model.activities {
        let loc = format!("activity \"{}\"", activity.id);
        if activity.id.is_empty() {
            push(
                DiagnosticCode::EmptyActivityId,
                loc.clone(),
                "activity id must be non-empty".to_string(),
            );
        }
        if !seen_activities.insert(activity.id.as_str()) {
            push(
                DiagnosticCode::DuplicateActivityId,
                loc.clone(),
                format!("activity id \"{}\" declared more than once", activity.id),
            );
        }

        let mut seen_widgets = BTreeSet::new();
        for widget in &activity.widgets {
            let wloc = format!("{loc} widget \"{}\"", widget.id);
            if !seen_widgets.insert(widget.id.as_str()) {
                push(
                    DiagnosticCode::DuplicateWidgetId,
                    wloc.clone(),
                    format!("widget id \"{}\" declared more than once", widget.id),
                );
            }
            if widget.kind != classify_widget_kind(&widget.type_name) {
                push(
                    DiagnosticCode::KindMismatch,
                    wloc.clone(),
                    format!(
                        "kind {:?} does not match type \"{}\"",
                        widget.kind, widget.type_name
                    ),
                );
            }
            if let Some(designated) = widget.designated_property() {
                if !widget.properties.contains_key(designated) {
                    push(
                        DiagnosticCode::MissingDesignatedProperty,
                        wloc.clone(),
                        format!(
                            "{:?} widget must declare a \"{designated}\" property",
                            widget.kind
                        ),
                    );
                }
                if !widget.app_relevant.contains(designated) {
                    push(
                        DiagnosticCode::EditablePropertyNotAppRelevant,
                        wloc.clone(),
                        format!("\"{designated}\" must be app-relevant on an editable widget"),
                    );
                }
            }
            if widget.kind == WidgetKind::EditableNoText {
                if let Some(value) = widget.properties.get("checked") {
                    if value != "true" && value != "false" {
                        push(
                            DiagnosticCode::MissingDesignatedProperty,
                            wloc.clone(),
                            format!("\"checked\" must be \"true\" or \"false\", got \"{value}\""),
                        );
                    }
                }
            }
            for property in &widget.app_relevant {
                if GEOMETRY_PROPERTIES.contains(&property.as_str()) {
                    push(
                        DiagnosticCode::GeometryPropertyInScope,
                        wloc.clone(),
                        format!("geometry property \"{property}\" cannot be app-relevant"),
                    );
                } else if !widget.properties.contains_key(property) {
                    push(
                        DiagnosticCode::AppRelevantUnknownProperty,
                        wloc.clone(),
                        format!("app-relevant property \"{property}\" is not declared"),
                    );
                }
            }
        }

        for (key, program) in &activity.handlers {
            let hloc = format!("{loc} handler \"{key}\"");
            if let Some(widget) = key.widget() {
                if !seen_widgets.contains(widget) {
                    push(
                        DiagnosticCode::UnknownHandlerWidget,
                        hloc.clone(),
                        format!("handler key references undeclared widget \"{widget}\""),
                    );
                }
            }
            check_program(
                activity,
                &hloc,
                program,
                &seen_widgets,
                &activity_ids,
                &mut push,
            );
        }
    }

    out
}

fn check_program(
    activity: &super::ActivityModel,
    hloc: &str,
    program: &HandlerProgram,
    widget_ids: &BTreeSet<&str>,
    activity_ids: &BTreeSet<&str>,
    push: &mut impl FnMut(DiagnosticCode, String, String),
) {
    let mut defined: BTreeSet<&str> = BTreeSet::new();

    let mut check_widget_prop = |widget: &str, property: Option<&str>, push: &mut dyn FnMut(DiagnosticCode, String, String)| {
        if !widget_ids.contains(widget) {
            push(
                DiagnosticCode::UnknownWidget,
                hloc.to_string(),
                format!("statement references undeclared widget \"{widget}\""),
            );
            return;
        }
        if let (Some(property), Some(model)) = (property, activity.widget(widget)) {
            if !model.properties.contains_key(property) {
                push(
                    DiagnosticCode::UnknownProperty,
                    hloc.to_string(),
                    format!("widget \"{widget}\" has no property \"{property}\""),
                );
            }
        }
    };

    for (index, statement) in program.statements.iter().enumerate() {
        let sloc = format!("{hloc} statement {index}");
        let mut check_expr = |expr: &Expression,
                              defined: &BTreeSet<&str>,
                              push: &mut dyn FnMut(DiagnosticCode, String, String)| {
            let mut vars = Vec::new();
            expr.referenced_vars(&mut vars);
            for var in vars {
                if !defined.contains(var) {
                    push(
                        DiagnosticCode::UseBeforeDef,
                        sloc.clone(),
                        format!("variable \"{var}\" used before assignment"),
                    );
                }
            }
            let mut widgets = Vec::new();
            expr.referenced_widgets(&mut widgets);
            for (widget, property) in widgets {
                check_widget_prop(widget, Some(property), push);
            }
        };

        match statement {
            Statement::Assign { var, value } => {
                check_expr(value, &defined, push);
                defined.insert(var);
            }
            Statement::WidgetWrite {
                widget,
                property,
                value,
            } => {
                check_expr(value, &defined, push);
                check_widget_prop(widget, Some(property), push);
            }
            Statement::WidgetRead {
                var,
                widget,
                property,
            } => {
                check_widget_prop(widget, Some(property), push);
                defined.insert(var);
            }
            Statement::SinkCall {
                class,
                method,
                args,
            } => {
                for arg in args {
                    check_expr(arg, &defined, push);
                }
                if crate::engine::store_api_tier(class).is_some()
                    && method.starts_with("put")
                    && args.len() != 2
                {
                    push(
                        DiagnosticCode::BadStoreArity,
                        sloc.clone(),
                        format!(
                            "{class}.{method} expects (key, value), got {} args",
                            args.len()
                        ),
                    );
                }
            }
            Statement::Restore { key, widget, property, .. } => {
                check_expr(key, &defined, push);
                check_widget_prop(widget, Some(property), push);
            }
            Statement::Navigate { activity: target } => {
                if !activity_ids.contains(target.as_str()) {
                    push(
                        DiagnosticCode::UnknownNavigationTarget,
                        sloc.clone(),
                        format!("navigate target \"{target}\" is not a declared activity"),
                    );
                }
            }
            Statement::Finish
            | Statement::ShowDialog { .. }
            | Statement::DismissDialog { .. }
            | Statement::Crash { .. }
            | Statement::Noop => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_app_model;
    use super::*;

    fn model_with_handler(statements: &str) -> AppModel {
        let text = format!(
            r#"{{
                "app_id": "demo",
                "launcher": "main",
                "activities": [
                    {{
                        "id": "main",
                        "widgets": [
                            {{"id": "name", "type": "EditText", "properties": {{"text": ""}}}}
                        ],
                        "handlers": {{"onCreate": {statements}}}
                    }}
                ]
            }}"#
        );
        parse_app_model(&text).unwrap()
    }

    #[test]
    fn valid_minimal_model_has_no_diagnostics() {
        let model = model_with_handler("[]");
        assert_eq!(validate(&model), vec![]);
    }

    #[test]
    fn duplicate_widget_id_is_flagged() {
        let mut model = model_with_handler("[]");
        let widget = model.activities[0].widgets[0].clone();
        model.activities[0].widgets.push(widget);
        let codes: Vec<_> = validate(&model).into_iter().map(|d| d.code).collect();
        assert!(codes.contains(&DiagnosticCode::DuplicateWidgetId));
    }

    #[test]
    fn use_before_def_is_flagged() {
        let model = model_with_handler(
            r#"[{"op": "assign", "var": "x", "value": {"kind": "var", "name": "y"}}]"#,
        );
        let codes: Vec<_> = validate(&model).into_iter().map(|d| d.code).collect();
        assert_eq!(codes, vec![DiagnosticCode::UseBeforeDef]);
    }

    #[test]
    fn read_then_use_is_clean() {
        let model = model_with_handler(
            r#"[
                {"op": "widget_read", "var": "v", "widget": "name", "property": "text"},
                {"op": "assign", "var": "x", "value": {"kind": "var", "name": "v"}}
            ]"#,
        );
        assert_eq!(validate(&model), vec![]);
    }

    #[test]
    fn geometry_in_scope_is_flagged() {
        let mut model = model_with_handler("[]");
        model.activities[0].widgets[0]
            .properties
            .insert("bounds".into(), "0,0,1,1".into());
        model.activities[0].widgets[0]
            .app_relevant
            .insert("bounds".into());
        let codes: Vec<_> = validate(&model).into_iter().map(|d| d.code).collect();
        assert!(codes.contains(&DiagnosticCode::GeometryPropertyInScope));
    }

    #[test]
    fn editable_without_text_property_is_flagged() {
        let mut model = model_with_handler("[]");
        model.activities[0].widgets[0].properties.remove("text");
        model.activities[0].widgets[0].app_relevant.remove("text");
        let codes: Vec<_> = validate(&model).into_iter().map(|d| d.code).collect();
        assert!(codes.contains(&DiagnosticCode::MissingDesignatedProperty));
        assert!(codes.contains(&DiagnosticCode::EditablePropertyNotAppRelevant));
    }
}
