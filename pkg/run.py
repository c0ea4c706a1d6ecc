import os
import sys
import json
import time

from adsputils import setup_logging

import celery
import argparse
import numpy as np

from quanvolve import tasks
from quanvolve.circuits.common import describe, save_circuit, circuit_hash
from quanvolve.circuits.handler import build_circuit, generate_filter_bank
from quanvolve.datareaders.handler import load_dataset, save_dataset, FORMATS
from quanvolve.datareaders.IDXfile import labels_path
from quanvolve.datareaders.synthetic import make_dataset
from quanvolve.exceptions import QuanvolveError, ConfigError, DataError, NumericError, PipelineError
from quanvolve.expressibility import expr_sweep, write_expr_report, ExprReport, GRID_PARAMETERS
from quanvolve.pipeline import RunConfig, run_pipeline, verify_manifest, preprocess_files, train_and_save, \
    load_training_inputs, evaluate_run
from quanvolve.quantize import quantization_report, write_quantization_report
from quanvolve.utils import get_config, make_rng, derive_seed, canonical_json, parse_seed_range, parse_grid

app = tasks.app
logger = setup_logging('run.py')


def setting(args, name, run_config, key=None):
    """
    explicit flag, then the --config run configuration, then None for the config.py default

    :param args:
    :param name: argparse dest
    :param run_config: RunConfig or None
    :param key: RunConfig field when it differs from name
    :return:
    """
    value = getattr(args, name, None)
    if value is None and run_config is not None:
        value = getattr(run_config, key or name, None)
    return value


def single_seed(args, run_config):
    """

    :return: the one seed of commands that do not take a range
    """
    if args.seed is None:
        return run_config.seed if run_config is not None else 0
    seeds = parse_seed_range(args.seed)
    if len(seeds) != 1:
        raise ConfigError('Command %s takes a single seed, got `%s`.' % (args.command, args.seed))
    return seeds[0]


def check_queue(task_id_list, results):
    """
    one pass over the pending tasks, finished ones move to results,
    failed ones are requeued under a new task id until their retries run out

    :param task_id_list: list of (key, task, task args, task_id, num_retry)
    :param results: dict of key -> task result
    :return:
    """
    for key, task, task_args, task_id, num_retry in task_id_list[:]:
        result = app.AsyncResult(task_id)
        logger.debug('Task %s for %s is %s.' % (task_id, key, result.state))
        if result.state not in ('SUCCESS', 'FAILURE'):
            continue
        task_id_list.remove((key, task, task_args, task_id, num_retry))
        if result.state == 'SUCCESS' and result.result is not False:
            results[key] = result.result
        elif num_retry > 1:
            logger.info('Requeueing %s, %d attempts left.' % (key, num_retry - 1))
            # a fresh task id, celery confuses reused ones
            task_id = celery.uuid()
            task_id_list.append((key, task, task_args, task_id, num_retry - 1))
            task.apply_async(args=task_args, task_id=task_id)
        else:
            logger.error('Task for %s failed after all retries.' % (key,))
            results[key] = False


def queue_tasks(task, arg_list):
    """
    queue every task and wait for all of them

    :param task: celery task
    :param arg_list: list of (key, task args)
    :return: dict of key -> result
    """
    task_id_list = []
    max_retry = int(get_config('QUEUE_MAX_RETRY', 3))
    for key, task_args in arg_list:
        task_id = celery.uuid()
        task.apply_async(args=task_args, task_id=task_id)
        task_id_list.append((key, task, task_args, task_id, max_retry))

    results = {}
    while task_id_list:
        time.sleep(int(get_config('QUEUE_POLL_SECONDS', 10)))
        check_queue(task_id_list, results)

    failed = [key for key, result in results.items() if result is False]
    if failed:
        raise PipelineError('queue', DataError('%d queued tasks failed: %s' % (len(failed), failed)))
    return results


def gen_circuit(args, run_config):
    """
    writes one circuit, or a bank of --count circuits into the output directory

    :param args:
    :param run_config:
    :return:
    """
    family = setting(args, 'family', run_config) or 'integrated'
    params = dict(k=setting(args, 'k', run_config) or int(get_config('KERNEL_SIZE', 3)),
                  n_qubits=setting(args, 'qubits', run_config, 'n_qubits') if family == 'integrated' else None,
                  L=setting(args, 'gates', run_config) if family == 'integrated' else None,
                  alpha=setting(args, 'alpha', run_config) or 'simple',
                  p=setting(args, 'p', run_config),
                  processing=setting(args, 'processing', run_config))
    seed = single_seed(args, run_config)
    if args.count == 1:
        circuits = [build_circuit(family, seed=seed, **params)]
        filenames = [args.output]
    else:
        circuits = generate_filter_bank(family, args.count, seed, **params)
        os.makedirs(args.output, exist_ok=True)
        filenames = [os.path.join(args.output, 'filter_%02d.json' % i) for i in range(args.count)]
    for circuit, filename in zip(circuits, filenames):
        save_circuit(circuit, filename)
        print('%s %s %s' % (filename, circuit_hash(circuit), json.dumps(describe(circuit), sort_keys=True)))
    if app.registry_enabled:
        app.record_filters(circuits)


def quantize_report(args, run_config):
    """

    :param args:
    :param run_config:
    :return:
    """
    datasets = {}
    for path in args.dataset:
        dataset = load_dataset(path, args.format, args.labels, size=args.size)
        datasets[dataset.name] = dataset.images
    levels = parse_grid(args.levels, int) if args.levels else [int(get_config('QUANTIZATION_LEVELS', 50))]
    rows = quantization_report(datasets, setting(args, 'k', run_config) or int(get_config('KERNEL_SIZE', 3)),
                               levels, setting(args, 'variant', run_config) or get_config('QUANTIZATION_VARIANT'))
    write_quantization_report(rows, args.output)


def preprocess(args, run_config):
    """

    :param args:
    :param run_config:
    :return:
    """
    params = dict(images=args.dataset, circuits=args.filters, output=args.output, fmt=args.format,
                  labels=args.labels,
                  size=setting(args, 'size', run_config, 'image_size'),
                  levels=setting(args, 'levels', run_config),
                  variant=setting(args, 'variant', run_config),
                  decode=setting(args, 'decode', run_config),
                  shots=setting(args, 'shots', run_config),
                  seed=single_seed(args, run_config), memo_path=args.memo, threads=args.threads)
    if args.queue:
        report = queue_tasks(tasks.task_preprocess_dataset, [(args.dataset, [params])])[args.dataset]
    else:
        report = preprocess_files(app=app, **params)
    print(canonical_json(report))


def expressibility(args, run_config):
    """

    :param args:
    :param run_config:
    :return:
    """
    family = setting(args, 'family', run_config) or 'integrated'
    if family not in GRID_PARAMETERS:
        raise ConfigError('No expressibility sweep for family `%s`.' % family)
    if family == 'integrated':
        grid = parse_grid(args.gates or '4:40:4', int)
    else:
        grid = parse_grid(args.grid_p or '0.05,0.15,0.35,0.55,0.75,0.95', float)
    k = setting(args, 'k', run_config) or int(get_config('KERNEL_SIZE', 3))
    n_qubits = setting(args, 'qubits', run_config, 'n_qubits') if family == 'integrated' else None
    alpha = setting(args, 'alpha', run_config) or 'simple'
    repeats = args.repeats or int(get_config('EXPR_REPEATS', 10))
    pairs = args.pairs or int(get_config('EXPR_PAIRS', 1024))
    bins = args.bins or int(get_config('EXPR_BINS', 50))
    seed = single_seed(args, run_config)

    if args.queue:
        n_qubits = n_qubits or (int(get_config('N_QUBITS', 4)) if family == 'integrated' else None)
        arg_list = [((value, repeat), [family, k, value, repeat, seed, pairs, bins, n_qubits, alpha])
                    for value in grid for repeat in range(repeats)]
        results = queue_tasks(tasks.task_expressibility_repeat, arg_list)
        reports = []
        for value in grid:
            report = ExprReport(family=family, k=k, n_qubits=n_qubits if family == 'integrated' else k * k,
                                alpha=alpha if family == 'integrated' else None, grid=GRID_PARAMETERS[family],
                                value=value, pairs=pairs, bins=bins)
            for repeat in range(repeats):
                report.expr.append(results[(value, repeat)][2])
                report.expr_prime.append(results[(value, repeat)][3])
            reports.append(report)
    else:
        reports = expr_sweep(family, grid, k, seed, repeats=repeats, n_pairs=pairs, bins=bins, n_qubits=n_qubits,
                             alpha=alpha)
    write_expr_report(reports, args.output)
    if app.registry_enabled:
        app.record_expressibility(reports)


def _input_params(features, images, fmt, labels, args, run_config):
    return dict(features=features, images=images, fmt=fmt, labels=labels,
                levels=setting(args, 'levels', run_config),
                variant=setting(args, 'variant', run_config),
                size=setting(args, 'size', run_config, 'image_size'))


def train(args, run_config):
    """
    one run file per seed; with several seeds the outputs are numbered and a summary is written

    :param args:
    :param run_config:
    :return:
    """
    seeds = parse_seed_range(args.seed) if args.seed is not None else [run_config.seed if run_config else 0]
    params = _input_params(args.features, args.images, args.format, args.labels, args, run_config)
    test = None
    if args.test_features or args.test_images:
        test = _input_params(args.test_features, args.test_images, args.format, args.test_labels, args, run_config)
    overrides = dict(lr=setting(args, 'lr', run_config), batch_size=setting(args, 'batch_size', run_config),
                     patience=setting(args, 'patience', run_config),
                     max_epochs=setting(args, 'max_epochs', run_config))
    alpha = args.alpha

    root, ext = os.path.splitext(args.output)
    outputs = dict((seed, args.output if len(seeds) == 1 else '%s_%d%s' % (root, seed, ext or '.json'))
                   for seed in seeds)
    if args.queue:
        task_params = dict(params, alpha=alpha, test=test, classes=args.classes, **overrides)
        results = queue_tasks(tasks.task_train_model,
                              [(seed, [task_params, seed, outputs[seed]]) for seed in seeds])
    else:
        inputs, labels, n_classes = load_training_inputs(**params)
        test_inputs = test_labels = None
        if test:
            test_inputs, test_labels, test_classes = load_training_inputs(**test)
            n_classes = max(n_classes, test_classes)
        n_classes = max(n_classes, args.classes or 0)
        results = dict((seed, train_and_save(inputs, labels, n_classes, seed, outputs[seed], alpha=alpha,
                                             test_inputs=test_inputs, test_labels=test_labels, app=app,
                                             **overrides))
                       for seed in seeds)

    if len(seeds) > 1:
        summary = {'runs': dict((str(seed), outputs[seed]) for seed in seeds)}
        accuracies = [results[seed]['accuracy'] for seed in seeds if 'accuracy' in results[seed]]
        if accuracies:
            summary['mean_accuracy'] = float(np.mean(accuracies))
            summary['std_accuracy'] = float(np.std(accuracies, ddof=1)) if len(accuracies) > 1 else 0.0
        with open('%s_summary.json' % root, 'w') as f:
            f.write(canonical_json(summary))
        print(canonical_json(summary))
    else:
        print(canonical_json(results[seeds[0]]))


def evaluate_model(args, run_config):
    """

    :param args:
    :param run_config:
    :return:
    """
    inputs, labels, _ = load_training_inputs(**_input_params(args.features, args.images, args.format, args.labels,
                                                             args, run_config))
    accuracy = evaluate_run(args.model, inputs, labels)
    print('accuracy %.6f' % accuracy)
    if args.output:
        with open(args.output, 'w') as f:
            f.write(canonical_json({'model': args.model, 'accuracy': accuracy, 'count': int(len(labels))}))


def pipeline(args, run_config):
    """
    a full run from --config and flags, or with --verify the rerun of a manifest

    :param args:
    :param run_config:
    :return:
    """
    if args.verify:
        if not args.manifest:
            raise ConfigError('--verify needs --manifest.')
        mismatches = verify_manifest(args.manifest, args.output)
        for name, expected, actual in mismatches:
            print('%s expected %s got %s' % (name, expected, actual))
        if mismatches:
            raise NumericError('%d artifacts of %s were not reproduced.' % (len(mismatches), args.manifest))
        print('manifest %s reproduced' % args.manifest)
        return

    cfg = run_config or RunConfig()
    overrides = {'train_path': args.train, 'train_format': args.format, 'train_labels': args.labels,
                 'test_path': args.test, 'test_format': args.format, 'test_labels': args.test_labels,
                 'output_dir': args.output, 'model': args.model, 'family': args.family, 'alpha': args.alpha,
                 'k': args.k, 'n_qubits': args.qubits, 'gates': args.gates, 'levels': args.levels,
                 'n_filters': args.filters, 'decode': args.decode, 'image_size': args.size,
                 'threads': args.threads if args.threads != 1 else None}
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    if args.seed is not None:
        cfg.seed = single_seed(args, None)
    manifest = run_pipeline(cfg, app)
    print(os.path.join(cfg.output_dir, 'manifest.json'))
    logger.info('Pipeline wrote %d artifacts.' % len(manifest['artifacts']))


def synth_data(args, run_config):
    """
    bundled synthetic train and test sets

    :param args:
    :param run_config:
    :return:
    """
    seed = single_seed(args, run_config)
    os.makedirs(args.output, exist_ok=True)
    for split, count in (('train', args.train), ('test', args.test)):
        rng = make_rng(derive_seed(seed, 'synthetic', split))
        dataset = make_dataset(args.classes, count, size=args.size, rng=rng, split=split)
        if args.format == 'idx':
            filename = os.path.join(args.output, '%s-images-idx3-ubyte' % split)
        else:
            filename = os.path.join(args.output, '%s.%s' % (split, args.format))
        save_dataset(dataset, filename, args.format)
        print(filename if args.format != 'idx' else '%s %s' % (filename, labels_path(filename)))


def diagnostics(args, run_config):
    """
    Show information about what we have in the registry.

    :param args:
    :param run_config:
    :return:
    """
    print(app.query_filter_tbl(args.filters))
    print(app.query_preprocess_tbl())


COMMANDS = {
    'gen-circuit': gen_circuit,
    'quantize-report': quantize_report,
    'preprocess': preprocess,
    'expressibility': expressibility,
    'train': train,
    'eval': evaluate_model,
    'pipeline': pipeline,
    'synth-data': synth_data,
    'diagnostics': diagnostics,
}


def add_global_arguments(parser, suppress=False):
    """
    the flags every command shares; with suppress an absent flag leaves the value parsed
    before the subcommand untouched, so they are accepted on either side of it

    :param parser:
    :param suppress:
    :return:
    """
    def default(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument('--seed',
                        dest='seed',
                        action='store',
                        default=default(None),
                        help='Master seed; train also accepts a range 0..9 or a list 1,4,5')

    parser.add_argument('--threads',
                        dest='threads',
                        action='store',
                        type=int,
                        default=default(1),
                        help='Worker threads for preprocessing')

    parser.add_argument('--config',
                        dest='config',
                        action='store',
                        default=default(None),
                        help='JSON run configuration, explicit flags take precedence')

    parser.add_argument('--queue',
                        dest='queue',
                        action='store_true',
                        default=default(False),
                        help='Dispatch work to the celery queues instead of running it here')
    return parser


def get_parser():
    """

    :return: argparse parser of all subcommands
    """
    parser = argparse.ArgumentParser(prog='quanvolve', description='Quanvolutional filters, preprocessing and training.')
    add_global_arguments(parser)
    common = add_global_arguments(argparse.ArgumentParser(add_help=False), suppress=True)

    subparsers = parser.add_subparsers(dest='command')

    command = subparsers.add_parser('gen-circuit', parents=[common], help='Generate circuit documents')
    command.add_argument('--family', dest='family', action='store', default=None)
    command.add_argument('--k', dest='k', action='store', type=int, default=None)
    command.add_argument('--qubits', dest='qubits', action='store', type=int, default=None)
    command.add_argument('--gates', dest='gates', action='store', type=int, default=None)
    command.add_argument('--alpha', dest='alpha', action='store', default=None, help='simple, rndmul or rndlin')
    command.add_argument('--p', dest='p', action='store', type=float, default=None,
                         help='Probability of a two-qubit gate in processing circuits')
    command.add_argument('--processing', dest='processing', action='store', default=None,
                         help='henderson to follow the encoder with a processing circuit')
    command.add_argument('--count', dest='count', action='store', type=int, default=1,
                         help='Size of the filter bank, the output is a directory when > 1')
    command.add_argument('-o', '--output', dest='output', action='store', required=True)

    command = subparsers.add_parser('quantize-report', parents=[common], help='Information loss against unique patches per level')
    command.add_argument('--dataset', dest='dataset', action='store', nargs='+', required=True)
    command.add_argument('--format', dest='format', action='store', default=None, choices=FORMATS)
    command.add_argument('--labels', dest='labels', action='store', default=None)
    command.add_argument('--size', dest='size', action='store', type=int, default=None,
                         help='Resize to size x size first, native size by default')
    command.add_argument('--k', dest='k', action='store', type=int, default=None)
    command.add_argument('--levels', dest='levels', action='store', default=None, help='e.g. 5,10,15,20,30,50,100')
    command.add_argument('--variant', dest='variant', action='store', default=None, help='nearest or floor')
    command.add_argument('-o', '--output', dest='output', action='store', required=True)

    command = subparsers.add_parser('preprocess', parents=[common], help='Feature maps of a dataset through a filter bank')
    command.add_argument('--dataset', dest='dataset', action='store', required=True)
    command.add_argument('--format', dest='format', action='store', default=None, choices=FORMATS)
    command.add_argument('--labels', dest='labels', action='store', default=None)
    command.add_argument('--size', dest='size', action='store', type=int, default=None)
    command.add_argument('--filters', dest='filters', action='store', nargs='+', required=True)
    command.add_argument('--levels', dest='levels', action='store', type=int, default=None)
    command.add_argument('--variant', dest='variant', action='store', default=None)
    command.add_argument('--decode', dest='decode', action='store', default=None,
                         help='analytic, sampled or most_frequent')
    command.add_argument('--shots', dest='shots', action='store', type=int, default=None)
    command.add_argument('--memo', dest='memo', action='store', default=None, help='Memo table file')
    command.add_argument('-o', '--output', dest='output', action='store', required=True)

    command = subparsers.add_parser('expressibility', parents=[common], help="Sweep expr' over a grid")
    command.add_argument('--family', dest='family', action='store', default=None)
    command.add_argument('--k', dest='k', action='store', type=int, default=None)
    command.add_argument('--qubits', dest='qubits', action='store', type=int, default=None)
    command.add_argument('--alpha', dest='alpha', action='store', default=None)
    command.add_argument('--gates', dest='gates', action='store', default=None, help='Grid of L, e.g. 4:40:4')
    command.add_argument('--p', dest='grid_p', action='store', default=None, help='Grid of p, e.g. 0.05,0.15')
    command.add_argument('--repeats', dest='repeats', action='store', type=int, default=None)
    command.add_argument('--pairs', dest='pairs', action='store', type=int, default=None)
    command.add_argument('--bins', dest='bins', action='store', type=int, default=None)
    command.add_argument('-o', '--output', dest='output', action='store', required=True)

    command = subparsers.add_parser('train', parents=[common], help='Train the classical head')
    command.add_argument('--features', dest='features', action='store', default=None)
    command.add_argument('--images', dest='images', action='store', default=None)
    command.add_argument('--format', dest='format', action='store', default=None, choices=FORMATS)
    command.add_argument('--labels', dest='labels', action='store', default=None)
    command.add_argument('--test-features', dest='test_features', action='store', default=None)
    command.add_argument('--test-images', dest='test_images', action='store', default=None)
    command.add_argument('--test-labels', dest='test_labels', action='store', default=None)
    command.add_argument('--classes', dest='classes', action='store', type=int, default=None)
    command.add_argument('--size', dest='size', action='store', type=int, default=None)
    command.add_argument('--levels', dest='levels', action='store', type=int, default=None)
    command.add_argument('--variant', dest='variant', action='store', default=None)
    command.add_argument('--alpha', dest='alpha', action='store', default=None,
                         help='Mapping of the filters that produced the features, rndlin trains longer')
    command.add_argument('--lr', dest='lr', action='store', type=float, default=None)
    command.add_argument('--batch-size', dest='batch_size', action='store', type=int, default=None)
    command.add_argument('--patience', dest='patience', action='store', type=int, default=None)
    command.add_argument('--max-epochs', dest='max_epochs', action='store', type=int, default=None)
    command.add_argument('-o', '--output', dest='output', action='store', required=True)

    command = subparsers.add_parser('eval', parents=[common], help='Accuracy of a trained model')
    command.add_argument('--model', dest='model', action='store', required=True)
    command.add_argument('--features', dest='features', action='store', default=None)
    command.add_argument('--images', dest='images', action='store', default=None)
    command.add_argument('--format', dest='format', action='store', default=None, choices=FORMATS)
    command.add_argument('--labels', dest='labels', action='store', default=None)
    command.add_argument('--size', dest='size', action='store', type=int, default=None)
    command.add_argument('--levels', dest='levels', action='store', type=int, default=None)
    command.add_argument('--variant', dest='variant', action='store', default=None)
    command.add_argument('-o', '--output', dest='output', action='store', default=None)

    command = subparsers.add_parser('pipeline', parents=[common], help='Quantize, generate, preprocess, train and evaluate')
    command.add_argument('--train', dest='train', action='store', default=None)
    command.add_argument('--test', dest='test', action='store', default=None)
    command.add_argument('--format', dest='format', action='store', default=None, choices=FORMATS)
    command.add_argument('--labels', dest='labels', action='store', default=None)
    command.add_argument('--test-labels', dest='test_labels', action='store', default=None)
    command.add_argument('--model', dest='model', action='store', default=None, choices=('cnn', 'qnn'))
    command.add_argument('--family', dest='family', action='store', default=None)
    command.add_argument('--alpha', dest='alpha', action='store', default=None)
    command.add_argument('--k', dest='k', action='store', type=int, default=None)
    command.add_argument('--qubits', dest='qubits', action='store', type=int, default=None)
    command.add_argument('--gates', dest='gates', action='store', type=int, default=None)
    command.add_argument('--filters', dest='filters', action='store', type=int, default=None)
    command.add_argument('--levels', dest='levels', action='store', type=int, default=None)
    command.add_argument('--decode', dest='decode', action='store', default=None)
    command.add_argument('--size', dest='size', action='store', type=int, default=None)
    command.add_argument('--manifest', dest='manifest', action='store', default=None)
    command.add_argument('--verify', dest='verify', action='store_true',
                         help='Rerun the manifest and compare every artifact hash')
    command.add_argument('-o', '--output', dest='output', action='store', default=None)

    command = subparsers.add_parser('synth-data', parents=[common], help='Write the bundled synthetic dataset')
    command.add_argument('--classes', dest='classes', action='store', type=int, default=2)
    command.add_argument('--train', dest='train', action='store', type=int, default=200)
    command.add_argument('--test', dest='test', action='store', type=int, default=50)
    command.add_argument('--size', dest='size', action='store', type=int, default=30)
    command.add_argument('--format', dest='format', action='store', default='idx', choices=FORMATS)
    command.add_argument('-o', '--output', dest='output', action='store', required=True)

    command = subparsers.add_parser('diagnostics', parents=[common], help='Show registry records')
    command.add_argument('--filters', dest='filters', action='store', nargs='*', default=None,
                         help='Filter hashes, the 10 most recent when omitted')

    return parser


def main(argv=None):
    """

    :param argv:
    :return: exit code
    """
    args = get_parser().parse_args(argv)
    if args.command is None:
        get_parser().print_help()
        return ConfigError.exit_code
    try:
        run_config = RunConfig.from_json(args.config) if args.config else None
        COMMANDS[args.command](args, run_config)
    except QuanvolveError as e:
        logger.error('%s failed: %s' % (args.command, e))
        print('error: %s' % e, file=sys.stderr)
        return e.exit_code
    return 0


if __name__ == '__main__':
    sys.exit(main())
