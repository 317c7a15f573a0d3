//! Interactive games between a human and the engine.
//!
//! A human playing Bob asks questions and the engine answers as the optimal
//! adversary. A human playing Alice answers the questions of the engine's
//! optimal Bob. Sessions are plain values; the service layer owns storage.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{parse_wire_edge, wire_edge};
use crate::graph::{edge_count, EdgeIndex};
use crate::position::{Answer, Position, PositionTable, Verdict};
use crate::property::{builtin, Property, PropertyDoc};
use crate::solver::{solve, SolveReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Bob,
    Alice,
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bob" => Ok(Role::Bob),
            "alice" => Ok(Role::Alice),
            other => Err(Error::Parse(format!("role must be `bob` or `alice`, got `{other}`"))),
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Bob => "bob",
            Role::Alice => "alice",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameStatus {
    Ongoing,
    DecidedIn,
    DecidedOut,
}

impl GameStatus {
    fn of(verdict: Verdict) -> Self {
        match verdict {
            Verdict::In => GameStatus::DecidedIn,
            Verdict::Out => GameStatus::DecidedOut,
            Verdict::Undetermined => GameStatus::Ongoing,
        }
    }

    pub fn is_finished(self) -> bool {
        self != GameStatus::Ongoing
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hint {
    pub edge: [usize; 2],
    pub worst_case_remaining: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HistoryEntry {
    pub edge: [usize; 2],
    pub answer: Answer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeView {
    pub edge: [usize; 2],
    pub status: &'static str,
}

/// Snapshot of a session as sent to clients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GameView {
    pub id: String,
    pub n: usize,
    pub role: Role,
    pub status: GameStatus,
    pub questions_used: usize,
    pub total_questions: usize,
    pub exhausted: bool,
    pub history: Vec<HistoryEntry>,
    pub edges: Vec<EdgeView>,
    /// Reachable graph classes inside the property.
    pub reachable_in: usize,
    /// Reachable graph classes outside the property.
    pub reachable_out: usize,
    pub pending_question: Option<[usize; 2]>,
}

#[derive(Debug, Clone)]
pub struct GameSession {
    id: String,
    role: Role,
    property: Property,
    table: &'static PositionTable,
    report: Arc<SolveReport>,
    position: Position,
    history: Vec<(EdgeIndex, Answer)>,
    status: GameStatus,
    pending: Option<EdgeIndex>,
}

impl GameSession {
    pub fn new(id: impl Into<String>, property: Property, role: Role) -> Result<Self> {
        let table = PositionTable::shared(property.n())?;
        let report = Arc::new(solve(&property, table)?);
        Self::with_report(id, table, report, role)
    }

    /// Session over an already solved property.
    pub fn with_report(
        id: impl Into<String>,
        table: &'static PositionTable,
        report: Arc<SolveReport>,
        role: Role,
    ) -> Result<Self> {
        let position = Position::initial(table.n())?;
        let mut session = GameSession {
            id: id.into(),
            role,
            property: *report.property(),
            table,
            report,
            position,
            history: Vec::new(),
            status: GameStatus::Ongoing,
            pending: None,
        };
        session.refresh()?;
        Ok(session)
    }

    fn refresh(&mut self) -> Result<()> {
        self.status = GameStatus::of(self.report.verdict_at(self.table, &self.position));
        self.pending = match (self.role, self.status) {
            (Role::Alice, GameStatus::Ongoing) => Some(self.report.best_move(self.table, &self.position)?),
            _ => None,
        };
        Ok(())
    }

    fn ensure_ongoing(&self) -> Result<()> {
        if self.status.is_finished() {
            return Err(Error::Game("the game is already decided".into()));
        }
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn n(&self) -> usize {
        self.table.n()
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn property(&self) -> &Property {
        &self.property
    }

    pub fn position(&self) -> &Position {
        &self.position
    }

    pub fn status(&self) -> GameStatus {
        self.status
    }

    pub fn history(&self) -> &[(EdgeIndex, Answer)] {
        &self.history
    }

    pub fn questions_used(&self) -> usize {
        self.history.len()
    }

    pub fn pending_question(&self) -> Option<EdgeIndex> {
        self.pending
    }

    pub fn report(&self) -> &SolveReport {
        &self.report
    }

    /// Human Bob asks `edge`; the engine answers adversarially. The session
    /// is unchanged on error.
    pub fn ask(&mut self, edge: EdgeIndex) -> Result<Answer> {
        if self.role != Role::Bob {
            return Err(Error::Game("only a human Bob asks questions".into()));
        }
        self.ensure_ongoing()?;
        let answer = self.report.adversary_answer(self.table, &self.position, edge)?;
        self.apply(edge, answer)?;
        Ok(answer)
    }

    /// Human Alice answers the pending question; returns the engine's next
    /// question, if the game goes on.
    pub fn answer(&mut self, answer: Answer) -> Result<Option<EdgeIndex>> {
        if self.role != Role::Alice {
            return Err(Error::Game("only a human Alice answers questions".into()));
        }
        self.ensure_ongoing()?;
        let edge = self
            .pending
            .ok_or_else(|| Error::Game("no question is pending".into()))?;
        self.apply(edge, answer)?;
        Ok(self.pending)
    }

    fn apply(&mut self, edge: EdgeIndex, answer: Answer) -> Result<()> {
        self.position = self.position.child(edge, answer)?;
        self.history.push((edge, answer));
        self.refresh()
    }

    /// Engine's recommended question for a human Bob.
    pub fn hint(&self) -> Result<Hint> {
        if self.role != Role::Bob {
            return Err(Error::Game("hints are for a human Bob".into()));
        }
        self.ensure_ongoing()?;
        let edge = self.report.best_move(self.table, &self.position)?;
        Ok(Hint {
            edge: wire_edge(edge, self.n()),
            worst_case_remaining: self.report.remaining_at(self.table, &self.position),
        })
    }

    pub fn view(&self) -> GameView {
        let n = self.n();
        let reach = self.table.reachable(self.table.id_of(&self.position));
        let inside = reach.intersection(self.property.members()).count();
        GameView {
            id: self.id.clone(),
            n,
            role: self.role,
            status: self.status,
            questions_used: self.history.len(),
            total_questions: edge_count(n),
            exhausted: self.position.unknown_count() == 0,
            history: self
                .history
                .iter()
                .map(|&(e, answer)| HistoryEntry {
                    edge: wire_edge(e, n),
                    answer,
                })
                .collect(),
            edges: (0..edge_count(n))
                .map(|e| EdgeView {
                    edge: wire_edge(e, n),
                    status: match self.position.digit(e) {
                        0 => "absent",
                        2 => "present",
                        _ => "unknown",
                    },
                })
                .collect(),
            reachable_in: inside,
            reachable_out: reach.count() - inside,
            pending_question: self.pending.map(|e| wire_edge(e, n)),
        }
    }
}

/// Property as named in a game request: `"builtin:NAME"` or an inline
/// property document. File paths are not accepted over the wire.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum PropertySource {
    Named(String),
    Inline(PropertyDoc),
}

impl PropertySource {
    pub fn resolve(&self, n: usize) -> Result<Property> {
        let property = match self {
            PropertySource::Named(spec) => match spec.strip_prefix("builtin:") {
                Some(name) => builtin(name, n)?,
                None => {
                    return Err(Error::Parse(format!(
                        "property must be `builtin:NAME` or a document, got `{spec}`"
                    )))
                }
            },
            PropertySource::Inline(doc) => doc.resolve()?,
        };
        if property.n() != n {
            return Err(Error::VertexCountMismatch {
                expected: n,
                found: property.n(),
            });
        }
        Ok(property)
    }
}

/// Body of `POST /api/game`.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRequest {
    pub n: usize,
    pub property: PropertySource,
    pub role: Role,
}

/// Body of `POST /api/game/{id}/ask`.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AskRequest {
    pub edge: [usize; 2],
}

/// Body of `POST /api/game/{id}/answer`.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerRequest {
    pub answer: String,
}

pub fn parse_create_request(body: &[u8]) -> Result<(Property, Role)> {
    let req: CreateRequest = serde_json::from_slice(body)?;
    Ok((req.property.resolve(req.n)?, req.role))
}

pub fn parse_ask_request(body: &[u8], n: usize) -> Result<EdgeIndex> {
    let req: AskRequest = serde_json::from_slice(body)?;
    parse_wire_edge(req.edge, n)
}

pub fn parse_answer_request(body: &[u8]) -> Result<Answer> {
    let req: AnswerRequest = serde_json::from_slice(body)?;
    req.answer.parse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ClassTable;
    use crate::property::builtin;

    #[test]
    fn fresh_bob_session() {
        let s = GameSession::new("g", builtin("connected", 5).unwrap(), Role::Bob).unwrap();
        assert_eq!(s.status(), GameStatus::Ongoing);
        assert_eq!(s.position().unknown_count(), 10);
        let v = s.view();
        assert_eq!(v.reachable_in + v.reachable_out, 34);
        assert_eq!(v.pending_question, None);
        assert_eq!(s.hint().unwrap().edge, [1, 2]);
    }

    #[test]
    fn trivial_property_is_decided_at_once() {
        let empty = Property::empty(ClassTable::shared(5).unwrap());
        let s = GameSession::new("g", empty, Role::Bob).unwrap();
        assert_eq!(s.status(), GameStatus::DecidedOut);
        assert!(s.hint().is_err());
    }

    #[test]
    fn alice_session_starts_with_edge_12() {
        let s = GameSession::new("g", builtin("connected", 5).unwrap(), Role::Alice).unwrap();
        assert_eq!(s.view().pending_question, Some([1, 2]));
    }

    #[test]
    fn asking_twice_is_rejected() {
        let mut s = GameSession::new("g", builtin("complete", 5).unwrap(), Role::Bob).unwrap();
        assert_eq!(s.ask(3).unwrap(), Answer::Present);
        let before = s.view();
        assert_eq!(s.ask(3), Err(Error::EdgeAlreadyAsked(3)));
        assert_eq!(s.view(), before);
        assert!(s.answer(Answer::Present).is_err());
    }

    #[test]
    fn complete_needs_every_answer() {
        let mut s = GameSession::new("g", builtin("complete", 5).unwrap(), Role::Alice).unwrap();
        for k in 0..10 {
            assert_eq!(s.status(), GameStatus::Ongoing, "decided after {k}");
            s.answer(Answer::Present).unwrap();
        }
        assert_eq!(s.status(), GameStatus::DecidedIn);
        assert!(s.view().exhausted);
        assert!(s.answer(Answer::Present).is_err());
    }

    #[test]
    fn request_parsing() {
        let (p, role) = parse_create_request(br#"{"n":5,"property":"builtin:connected","role":"alice"}"#).unwrap();
        assert_eq!(p, builtin("connected", 5).unwrap());
        assert_eq!(role, Role::Alice);
        let (p, _) = parse_create_request(br#"{"n":4,"property":{"n":4,"classes":[0]},"role":"bob"}"#).unwrap();
        assert_eq!(p.class_ids(), vec![0]);
        assert!(parse_create_request(br#"{"n":5,"property":{"n":4,"classes":[0]},"role":"bob"}"#).is_err());
        assert!(parse_create_request(br#"{"n":5,"property":"/etc/passwd","role":"bob"}"#).is_err());
        assert!(parse_create_request(br#"{"n":5,"property":"builtin:connected","role":"eve"}"#).is_err());
        assert_eq!(parse_ask_request(br#"{"edge":[2,4]}"#, 5).unwrap(), 5);
        assert!(parse_ask_request(br#"{"edge":[4,2]}"#, 5).is_err());
        assert_eq!(parse_answer_request(br#"{"answer":"absent"}"#).unwrap(), Answer::Absent);
        assert!(parse_answer_request(br#"{"answer":"yes"}"#).is_err());
    }

    #[test]
    fn role_parsing() {
        assert_eq!("bob".parse::<Role>().unwrap(), Role::Bob);
        assert!("carol".parse::<Role>().is_err());
        assert!("maybe".parse::<Answer>().is_err());
    }
}
