"""
SQLAlchemy persistence for experiment runs, their records and constructed rules.
"""
from datetime import datetime
from typing import List, Optional
import json
import logging
import os

from sqlalchemy import Column, DateTime, Float, ForeignKey, Integer, String, Text, create_engine
from sqlalchemy.orm import Session, declarative_base, relationship, sessionmaker

from experiment import ExperimentRecord

logger = logging.getLogger(__name__)

Base = declarative_base()


class ExperimentRun(Base):
    """One invocation of the experiment harness"""
    __tablename__ = 'experiment_run'
    id = Column(Integer, primary_key=True)
    method = Column(String(64), nullable=False)
    integrand = Column(String(32), nullable=False)
    s = Column(Integer, nullable=False)
    alpha = Column(Float, nullable=False)
    weights = Column(String(500), nullable=False)
    tau = Column(Float)
    replications = Column(Integer, nullable=False)
    seed = Column(String(32), nullable=False)  # 64-bit seeds overflow SQLite INTEGER
    sizes = Column(Text, nullable=False)  # JSON list
    slope = Column(Float)
    created_at = Column(DateTime, default=datetime.utcnow)

    records = relationship('ExperimentRecordRow', backref='run', lazy=True, cascade='all, delete-orphan', order_by='ExperimentRecordRow.id')


class ExperimentRecordRow(Base):
    __tablename__ = 'experiment_record'
    id = Column(Integer, primary_key=True)
    run_id = Column(Integer, ForeignKey('experiment_run.id'), nullable=False)
    method = Column(String(64), nullable=False)
    size = Column(Integer, nullable=False)
    rep = Column(Integer, nullable=False)
    n_points = Column(Integer, nullable=False)
    estimate = Column(Float, nullable=False)


class StoredRule(Base):
    """A constructed rule document (rqmc/1 JSON)"""
    __tablename__ = 'stored_rule'
    id = Column(Integer, primary_key=True)
    kind = Column(String(16), nullable=False)
    seed = Column(String(32))
    document = Column(Text, nullable=False)
    created_at = Column(DateTime, default=datetime.utcnow)


def init_db(url: str) -> sessionmaker:
    """Create tables if needed and return a session factory."""
    if url.startswith('sqlite:///'):
        path = url[len('sqlite:///'):]
        if path and path != ':memory:':
            os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    engine = create_engine(url)
    Base.metadata.create_all(engine)
    logger.info(f"Results store ready: {url}")
    return sessionmaker(bind=engine)


def save_run(session: Session, config, records, slope: Optional[float] = None) -> int:
    """Persist an ExperimentConfig and its records; returns the run id."""
    run = ExperimentRun(
        method=config.method,
        integrand=config.integrand,
        s=config.s,
        alpha=config.alpha,
        weights=config.weight_spec,
        tau=config.tau,
        replications=config.replications,
        seed=str(config.seed),
        sizes=json.dumps(list(config.sizes)),
        slope=slope,
    )
    for rec in records:
        run.records.append(ExperimentRecordRow(method=rec.method, size=rec.size, rep=rec.rep,
                                               n_points=rec.n_points, estimate=rec.estimate))
    try:
        session.add(run)
        session.commit()
    except Exception:
        session.rollback()
        raise
    logger.info(f"Saved run {run.id} with {len(records)} records")
    return run.id


def load_records(session: Session, run_id: int):
    """Records of a stored run in (method, size, rep) order."""
    rows = (session.query(ExperimentRecordRow)
            .filter_by(run_id=run_id)
            .order_by(ExperimentRecordRow.method, ExperimentRecordRow.size, ExperimentRecordRow.rep)
            .all())
    return [ExperimentRecord(method=r.method, size=r.size, rep=r.rep, n_points=r.n_points, estimate=r.estimate)
            for r in rows]


def save_rule(session: Session, document: dict) -> int:
    row = StoredRule(kind=document.get('kind', ''),
                     seed=str(document['seed']) if 'seed' in document else None,
                     document=json.dumps(document, sort_keys=True))
    try:
        session.add(row)
        session.commit()
    except Exception:
        session.rollback()
        raise
    return row.id


def load_rule(session: Session, rule_id: int) -> Optional[dict]:
    row = session.get(StoredRule, rule_id)
    return json.loads(row.document) if row is not None else None


def list_runs(session: Session) -> List[ExperimentRun]:
    return session.query(ExperimentRun).order_by(ExperimentRun.id).all()
