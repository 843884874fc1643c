//! Scripted players that replay a fixed move list.
//!
//! These back transcript replay and the "same moves through two protocols"
//! comparisons. A scripted player panics when asked for more moves than it
//! holds; drivers only request moves for steps the script covered.

use super::{
    DecisionMaker, DmReality, Forecaster, LadderPortfolio, LadderSceptic, MergedForecaster,
    PlayState, Reality, Sceptic, TicketPortfolio,
};
use crate::measures::{CylinderMeasure, LossFn, ProbMeasure};

pub struct ScriptedForecaster {
    moves: Vec<ProbMeasure>,
    at: usize,
}

impl ScriptedForecaster {
    pub fn new(moves: Vec<ProbMeasure>) -> Self {
        Self { moves, at: 0 }
    }
}

impl Forecaster for ScriptedForecaster {
    fn forecast(&mut self, _play: &PlayState, _horizon: usize) -> ProbMeasure {
        let m = self.moves[self.at].clone();
        self.at += 1;
        m
    }
}

pub struct ScriptedMergedForecaster {
    moves: Vec<CylinderMeasure>,
    at: usize,
}

impl ScriptedMergedForecaster {
    pub fn new(moves: Vec<CylinderMeasure>) -> Self {
        Self { moves, at: 0 }
    }
}

impl MergedForecaster for ScriptedMergedForecaster {
    fn forecast(&mut self, _play: &PlayState, _step: usize) -> CylinderMeasure {
        let m = self.moves[self.at].clone();
        self.at += 1;
        m
    }
}

pub struct ScriptedSceptic {
    moves: Vec<TicketPortfolio>,
    at: usize,
}

impl ScriptedSceptic {
    pub fn new(moves: Vec<TicketPortfolio>) -> Self {
        Self { moves, at: 0 }
    }
}

impl Sceptic for ScriptedSceptic {
    fn tickets(&mut self, _play: &PlayState, _len: usize) -> TicketPortfolio {
        let m = self.moves[self.at].clone();
        self.at += 1;
        m
    }
}

pub struct ScriptedLadderSceptic {
    moves: Vec<LadderPortfolio>,
    at: usize,
}

impl ScriptedLadderSceptic {
    pub fn new(moves: Vec<LadderPortfolio>) -> Self {
        Self { moves, at: 0 }
    }
}

impl LadderSceptic for ScriptedLadderSceptic {
    fn tickets(&mut self, _play: &PlayState, _max_len: usize) -> LadderPortfolio {
        let m = self.moves[self.at].clone();
        self.at += 1;
        m
    }
}

pub struct ScriptedReality {
    moves: Vec<usize>,
    at: usize,
}

impl ScriptedReality {
    pub fn new(moves: Vec<usize>) -> Self {
        Self { moves, at: 0 }
    }
}

impl Reality for ScriptedReality {
    fn outcome(&mut self, _play: &PlayState) -> usize {
        let y = self.moves[self.at];
        self.at += 1;
        y
    }
}

pub struct ScriptedDmReality {
    outcomes: ScriptedReality,
    losses: Vec<LossFn>,
    at: usize,
}

impl ScriptedDmReality {
    pub fn new(outcomes: Vec<usize>, losses: Vec<LossFn>) -> Self {
        Self {
            outcomes: ScriptedReality::new(outcomes),
            losses,
            at: 0,
        }
    }
}

impl Reality for ScriptedDmReality {
    fn outcome(&mut self, play: &PlayState) -> usize {
        self.outcomes.outcome(play)
    }
}

impl DmReality for ScriptedDmReality {
    fn announce_loss(&mut self, _play: &PlayState, _horizon: usize) -> LossFn {
        let l = self.losses[self.at].clone();
        self.at += 1;
        l
    }
}

pub struct ScriptedDecisionMaker {
    moves: Vec<usize>,
    at: usize,
}

impl ScriptedDecisionMaker {
    pub fn new(moves: Vec<usize>) -> Self {
        Self { moves, at: 0 }
    }
}

impl DecisionMaker for ScriptedDecisionMaker {
    fn decide(&mut self, _play: &PlayState) -> usize {
        let d = self.moves[self.at];
        self.at += 1;
        d
    }
}
