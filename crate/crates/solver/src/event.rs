/// Which sign changes of an event function count as a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    #[default]
    Both,
    Rising,
    Falling,
}

/// A scalar event function `g(t, y)`; a crossing is a sign change of `g`.
pub struct Event<'a> {
    pub func: Box<dyn Fn(f64, &[f64]) -> f64 + 'a>,
    /// Terminal events stop the integration at the located crossing.
    pub terminal: bool,
    pub direction: Direction,
}

impl<'a> Event<'a> {
    pub fn new(func: impl Fn(f64, &[f64]) -> f64 + 'a) -> Self {
        Self {
            func: Box::new(func),
            terminal: true,
            direction: Direction::Both,
        }
    }

    /// Terminal event at a fixed time.
    pub fn at_time(t_event: f64) -> Self {
        Self::new(move |t, _| t - t_event).rising()
    }

    pub fn non_terminal(mut self) -> Self {
        self.terminal = false;
        self
    }

    pub fn rising(mut self) -> Self {
        self.direction = Direction::Rising;
        self
    }

    pub fn falling(mut self) -> Self {
        self.direction = Direction::Falling;
        self
    }

    pub(crate) fn value(&self, t: f64, y: &[f64]) -> f64 {
        (self.func)(t, y)
    }

    pub(crate) fn crossed(&self, before: f64, after: f64) -> bool {
        let up = before < 0.0 && after >= 0.0;
        let down = before > 0.0 && after <= 0.0;
        match self.direction {
            Direction::Both => up || down,
            Direction::Rising => up,
            Direction::Falling => down,
        }
    }
}

/// A located event crossing.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub index: usize,
    pub t: f64,
    pub y: Vec<f64>,
}
