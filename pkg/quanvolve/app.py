"""
The main application object (it has to be loaded by any worker/script)
in order to initialize the run registry and get a working configuration.
"""

from builtins import str
from adsputils import ADSCelery

from quanvolve.models import Filter, Preprocess, Expressibility, Training
from quanvolve.circuits.common import circuit_hash, serialize
from quanvolve.utils import get_date_now

from sqlalchemy.exc import SQLAlchemyError, DBAPIError
from sqlalchemy.sql import exists


class QuanvolvePipelineCelery(ADSCelery):

    STATUS_NEW = 'new'
    STATUS_EXISTS = 'exists'

    @property
    def registry_enabled(self):
        """
        :return: True when runs are recorded in the registry
        """
        return bool(self._config.get('REGISTRY_ENABLED', False))

    def query_filter_tbl(self, filter_hashes=None):
        """
        Queries filter table and returns results.

        :param filter_hashes: list of circuit hashes, the 10 most recent filters when empty
        :return: list of json records or None
        """
        try:
            with self.session_scope() as session:
                if filter_hashes:
                    rows = session.query(Filter).filter(Filter.filter_hash.in_(filter_hashes)).all()
                    self.logger.info("Fetched records for filter_hash = %s." % (filter_hashes))
                else:
                    rows = session.query(Filter).order_by(Filter.date.desc()).limit(10).all()
                    self.logger.info("Fetched records for 10 filters.")

                if len(rows) == 0:
                    if filter_hashes:
                        self.logger.error("No records found for filter_hash = %s." % (filter_hashes))
                    else:
                        self.logger.error("No records found in table `Filter`.")
                    return None

                return [row.toJSON() for row in rows]
        except (SQLAlchemyError, DBAPIError) as e:
            self.logger.error('SQLAlchemy: ' + str(e))
            return None

    def query_preprocess_tbl(self, limit=10):
        """
        Queries preprocess table and returns the most recent runs.

        :param limit:
        :return: list of json records or None
        """
        try:
            with self.session_scope() as session:
                rows = session.query(Preprocess).order_by(Preprocess.id.desc()).limit(limit).all()
                if len(rows) == 0:
                    self.logger.error("No records found in table `Preprocess`.")
                    return None
                return [row.toJSON() for row in rows]
        except (SQLAlchemyError, DBAPIError) as e:
            self.logger.error('SQLAlchemy: ' + str(e))
            return None

    def insert_filter_record(self, session, record):
        """
        check to see if the filter already exists in the db first, if not, then add it in

        :param session:
        :param record:
        :return: (filter_hash, status) or (None, None)
        """
        found = session.query(exists().where(Filter.filter_hash == record.filter_hash)).scalar()
        if found:
            return record.filter_hash, self.STATUS_EXISTS
        try:
            session.add(record)
            session.flush()
            self.logger.debug("Added a `Filter` record successfully.")
            return record.filter_hash, self.STATUS_NEW
        except SQLAlchemyError as e:
            self.logger.error("Attempt to add a `Filter` record failed: %s." % str(e.args))
            return None, None

    def insert_preprocess_record(self, session, record):
        """

        :param session:
        :param record:
        :return: id of the record, -1 on failure
        """
        try:
            session.add(record)
            session.flush()
            self.logger.debug("Added a `Preprocess` record successfully.")
            return record.id
        except SQLAlchemyError as e:
            self.logger.error("Attempt to add a `Preprocess` record failed: %s." % str(e.args))
            return -1

    def insert_expressibility_records(self, session, records):
        """

        :param session:
        :param records:
        :return:
        """
        try:
            session.bulk_save_objects(records)
            session.flush()
            self.logger.debug("Added `Expressibility` records successfully.")
            return True
        except SQLAlchemyError as e:
            self.logger.error("Attempt to add `Expressibility` records failed: %s." % str(e.args))
            return False

    def insert_training_record(self, session, record):
        """

        :param session:
        :param record:
        :return: id of the record, -1 on failure
        """
        try:
            session.add(record)
            session.flush()
            self.logger.debug("Added a `Training` record successfully.")
            return record.id
        except SQLAlchemyError as e:
            self.logger.error("Attempt to add a `Training` record failed: %s." % str(e.args))
            return -1

    def record_filters(self, circuits):
        """
        adds every circuit not yet known to the filter table

        :param circuits: list of CircuitSpec
        :return: number of new filters, -1 when the registry is unreachable
        """
        try:
            with self.session_scope() as session:
                added = 0
                for circuit in circuits:
                    record = Filter(filter_hash=circuit_hash(circuit),
                                    family=circuit.family,
                                    processing=circuit.processing,
                                    k=circuit.k,
                                    n_qubits=circuit.n_qubits,
                                    n_gates=len(circuit.gates),
                                    seed=None if circuit.seed is None else str(circuit.seed),
                                    document=serialize(circuit),
                                    date=get_date_now())
                    filter_hash, status = self.insert_filter_record(session, record)
                    if filter_hash is None:
                        session.rollback()
                        return -1
                    if status == self.STATUS_NEW:
                        added += 1
                session.commit()
                self.logger.info("Registered %d new filters out of %d." % (added, len(circuits)))
                return added
        except (SQLAlchemyError, DBAPIError) as e:
            self.logger.error('SQLAlchemy: ' + str(e))
            return -1

    def record_preprocess(self, dataset, cfg, levels, variant, report, features):
        """

        :param dataset: dataset name
        :param cfg: LayerConfig
        :param levels: number of quantization levels
        :param variant: quantization variant
        :param report: report of preprocess_dataset
        :param features: feature file path
        :return: id of the record, -1 on failure
        """
        try:
            with self.session_scope() as session:
                record = Preprocess(dataset=dataset,
                                    levels=levels,
                                    variant=variant,
                                    k=cfg.k,
                                    n_filters=cfg.channels,
                                    decode=cfg.decode_tag(),
                                    total_patches=report['total_patches'],
                                    unique_patches=report['unique_patches'],
                                    evaluator_calls=report['evaluator_calls'],
                                    memo_hits=report['memo_hits'],
                                    wall_time=report['wall_time'],
                                    features=features,
                                    date=get_date_now())
                record_id = self.insert_preprocess_record(session, record)
                if record_id == -1:
                    session.rollback()
                else:
                    session.commit()
                    self.logger.info("Registered preprocessing of %s as run %d." % (dataset, record_id))
                return record_id
        except (SQLAlchemyError, DBAPIError) as e:
            self.logger.error('SQLAlchemy: ' + str(e))
            return -1

    def record_expressibility(self, reports):
        """

        :param reports: list of ExprReport
        :return: True if all were added
        """
        try:
            with self.session_scope() as session:
                records = [Expressibility(family=r.family, k=r.k, n_qubits=r.n_qubits, alpha=r.alpha, grid=r.grid,
                                          value=float(r.value), repeats=r.repeats, pairs=r.pairs,
                                          mean_expr_prime=r.mean_expr_prime, std_expr_prime=r.std_expr_prime,
                                          date=get_date_now())
                           for r in reports]
                success = self.insert_expressibility_records(session, records)
                if success:
                    session.commit()
                    self.logger.info("Registered %d expressibility grid points." % len(records))
                else:
                    session.rollback()
                return success
        except (SQLAlchemyError, DBAPIError) as e:
            self.logger.error('SQLAlchemy: ' + str(e))
            return False

    def record_training(self, model_path, seed, history, accuracy=None):
        """

        :param model_path:
        :param seed:
        :param history:
        :param accuracy:
        :return: id of the record, -1 on failure
        """
        try:
            with self.session_scope() as session:
                record = Training(model_path=model_path,
                                  seed=str(seed),
                                  epochs=len(history),
                                  final_loss=history[-1]['loss'] if history else None,
                                  accuracy=accuracy,
                                  date=get_date_now())
                record_id = self.insert_training_record(session, record)
                if record_id == -1:
                    session.rollback()
                else:
                    session.commit()
                return record_id
        except (SQLAlchemyError, DBAPIError) as e:
            self.logger.error('SQLAlchemy: ' + str(e))
            return -1
