import pprint
import sys

from tqdm import tqdm
from absl import app, flags
import absl.logging as logging
import tux

from liftproof.cnf import GraphFactory, gen_php, gen_random_tcnf, parse_dimacs, write_dimacs, write_edge_list
from liftproof.cutting_planes import (
    check_cpk, cp_php_refutation, cpk_rank, lift_cp_refutation, parse_cpk, write_cpk
)
from liftproof.degree import approx_degree, to_sign_table
from liftproof.gap import GapExperiment
from liftproof.lifting import (
    LiftFactory, ParityParams, TensorParams, lift_parity, lift_tensor, write_provenance
)
from liftproof.resolution import (
    check_resolution, dt_to_resolution, lift_refutation_parity, parse_resolution, proof_rank,
    write_resolution
)
from liftproof.search import (
    DepthOracle, SearchProblem, binary_search_tree, lifted_search_tree_parity,
    lifted_search_tree_tensor, parse_tree, verify_search_tree, write_tree
)


FLAGS, FLAGS_DEF = tux.define_flags_with_default(
    input='',
    output='',
    formula='',
    proof='',
    tree='',
    graph='',
    provenance='',
    formula_out='',
    seed=0,
    pigeons=3,
    degree=5,
    complete=False,
    t=3,
    n=8,
    m=0,
    delta=25,
    k=2,
    ell=2,
    a=1,
    mode='parity',
    total=False,
    construction='optimal',
    table='',
    epsilon='5/6',
    seeds='1,2,3,4,5',
    trials=10000,
    integral_method='auto',
    lp_method='auto',
    log_wandb=False,
    logger=tux.WandBLogger.get_default_config(),
)
flags.DEFINE_alias('i', 'input')
flags.DEFINE_alias('o', 'output')
flags.DEFINE_alias('f', 'formula')
flags.DEFINE_alias('p', 'proof')


class UsageError(Exception):
    pass


def _require(name):
    value = getattr(FLAGS, name)
    if value == '':
        raise UsageError(f'missing required flag --{name}')
    return value


def _read(name):
    path = _require(name)
    try:
        with open(path, 'rb') as fin:
            return fin.read()
    except OSError as error:
        raise UsageError(f'--{name}: cannot read {path}: {error.strerror}')


def _write(data, path=None):
    path = FLAGS.output if path is None else path
    if path == '':
        sys.stdout.write(data.decode('ascii'))
        sys.stdout.flush()
        return
    with open(path, 'wb') as fout:
        fout.write(data)


def _report_check(check, what):
    if check:
        print(f'{what}: ok')
        return 0
    print(f'{what}: FAILED at line {check.line}: {check.reason}')
    return 1


def _graph():
    if FLAGS.graph:
        config = {'type': 'file', 'path': FLAGS.graph}
    elif FLAGS.complete:
        config = {'type': 'complete', 'pigeons': FLAGS.pigeons}
    else:
        config = {'type': 'random', 'pigeons': FLAGS.pigeons, 'degree': FLAGS.degree, 'seed': FLAGS.seed}
    return GraphFactory.build(config)


def _base_formula():
    return parse_dimacs(_read('formula'))


def _base_tree(formula):
    if FLAGS.tree:
        return parse_tree(_read('tree'))
    return DepthOracle().optimal_tree(SearchProblem(formula))


def cmd_gen(kind):
    if kind == 'php':
        _write(write_dimacs(gen_php(_graph())))
    elif kind == 'random':
        m = FLAGS.m or FLAGS.delta * FLAGS.n
        _write(write_dimacs(gen_random_tcnf(FLAGS.t, FLAGS.n, m, FLAGS.seed)))
    elif kind == 'graph':
        _write(write_edge_list(_graph()))
    else:
        raise UsageError(f'unknown gen target {kind!r} (php|random|graph)')
    return 0


def cmd_lift(kind):
    lift_type = {'tensor': 'tensor', 'parity': 'parity', 'gap-mode': 'gap'}.get(kind)
    if lift_type is None:
        raise UsageError(f'unknown lift mode {kind!r} (tensor|parity|gap-mode)')
    formula = parse_dimacs(_read('input'))
    lifted = LiftFactory.lift(formula, {'type': lift_type, 'k': FLAGS.k, 'ell': FLAGS.ell, 'a': FLAGS.a})
    _write(write_dimacs(lifted.formula))
    provenance = FLAGS.provenance or (FLAGS.output + '.prov' if FLAGS.output else '')
    if provenance:
        _write(write_provenance(lifted), provenance)
    logging.info('Lifted %s to %s.', formula, lifted.formula)
    return 0


def cmd_check(kind):
    formula = parse_dimacs(_read('formula'))
    if kind == 'res':
        return _report_check(check_resolution(formula, parse_resolution(_read('proof'))), 'resolution')
    elif kind == 'cpk':
        return _report_check(check_cpk(formula, parse_cpk(_read('proof'))), 'cp(k)')
    raise UsageError(f'unknown proof system {kind!r} (res|cpk)')


def cmd_rank(kind):
    if kind == 'res':
        proof = parse_resolution(_read('proof'))
        print(proof_rank(proof))
    elif kind == 'cpk':
        proof = parse_cpk(_read('proof'))
        print(cpk_rank(proof))
    else:
        raise UsageError(f'unknown proof system {kind!r} (res|cpk)')
    return 0


def cmd_dt(kind):
    oracle = DepthOracle()
    if kind == 'depth':
        if FLAGS.table:
            print(oracle.depth([int(v) for v in FLAGS.table.split(',')]))
        else:
            print(oracle.depth(SearchProblem(_base_formula())))
        return 0
    elif kind == 'build':
        formula = _base_formula()
        if FLAGS.construction == 'optimal':
            tree = oracle.optimal_tree(SearchProblem(formula))
        elif FLAGS.construction == 'binary':
            tree = binary_search_tree(formula, depth_oracle=oracle)
        else:
            raise UsageError(f'--construction must be optimal or binary, got {FLAGS.construction!r}')
        _write(write_tree(tree))
        return _report_check(verify_search_tree(tree, formula), f'tree of height {tree.height}')
    elif kind == 'lift':
        formula = _base_formula()
        tree = _base_tree(formula)
        if FLAGS.mode not in ('parity', 'tensor'):
            raise UsageError(f'--mode must be parity or tensor, got {FLAGS.mode!r}')
        lifted = LiftFactory.lift(formula, {'type': FLAGS.mode, 'k': FLAGS.k, 'ell': FLAGS.ell, 'a': FLAGS.a})
        if lifted.mode == 'tensor':
            lifted_tree = lifted_search_tree_tensor(tree, lifted, total=FLAGS.total)
            domain = None if FLAGS.total else lifted.selector_valid_mask
        else:
            lifted_tree = lifted_search_tree_parity(tree, lifted)
            domain = None
        _write(write_tree(lifted_tree))
        if FLAGS.formula_out:
            _write(write_dimacs(lifted.formula), FLAGS.formula_out)
        check = verify_search_tree(lifted_tree, lifted.formula, domain)
        return _report_check(check, f'lifted tree of height {lifted_tree.height}')
    raise UsageError(f'unknown dt command {kind!r} (depth|build|lift)')


def cmd_prove(kind):
    if kind == 'res':
        formula = _base_formula()
        proof = dt_to_resolution(_base_tree(formula), formula)
        _write(write_resolution(proof))
        return _report_check(check_resolution(formula, proof), f'resolution rank {proof_rank(proof)}')
    elif kind == 'lift-res':
        formula = _base_formula()
        tree = _base_tree(formula)
        params = ParityParams(FLAGS.k, FLAGS.a)
        lifted = lift_parity(formula, params)
        proof = lift_refutation_parity(formula, tree, params, lifted=lifted)
        _write(write_resolution(proof))
        if FLAGS.formula_out:
            _write(write_dimacs(lifted.formula), FLAGS.formula_out)
        check = check_resolution(lifted.formula, proof)
        return _report_check(check, f'lifted resolution rank {proof_rank(proof)}')
    elif kind in ('php-cp', 'lift-cpk'):
        graph = _graph()
        base = cp_php_refutation(graph)
        formula = gen_php(graph)
        if kind == 'php-cp':
            proof = base
        else:
            lifted = lift_tensor(formula, TensorParams(FLAGS.k, FLAGS.ell))
            proof = lift_cp_refutation(base, lifted)
            formula = lifted.formula
        _write(write_cpk(proof))
        if FLAGS.formula_out:
            _write(write_dimacs(formula), FLAGS.formula_out)
        return _report_check(check_cpk(formula, proof), f'cp({proof.k}) rank {cpk_rank(proof)}')
    raise UsageError(f'unknown prove target {kind!r} (res|php-cp|lift-cpk|lift-res)')


def cmd_gap(kind):
    if kind != 'run':
        raise UsageError(f'unknown gap command {kind!r} (run)')
    try:
        seeds = [int(s) for s in FLAGS.seeds.split(',') if s.strip()]
    except ValueError:
        raise UsageError(f'--seeds must be a comma separated list of integers, got {FLAGS.seeds!r}')
    experiment = GapExperiment({
        't': FLAGS.t, 'n': FLAGS.n, 'delta': FLAGS.delta, 'trials': FLAGS.trials,
        'integral_method': FLAGS.integral_method, 'lp_method': FLAGS.lp_method,
    })
    logger = None
    if FLAGS.log_wandb:
        logger = tux.WandBLogger(
            config=FLAGS.logger,
            variant=tux.get_user_flags(FLAGS, FLAGS_DEF),
            enable=FLAGS.log_wandb,
        )
    records = []
    for seed in tqdm(seeds, ncols=0, disable=len(seeds) < 2):
        report = experiment.run(seed)
        records.append(report.to_record())
        if logger is not None:
            logger.log(report.to_dict())
        tqdm.write(pprint.pformat(report.to_dict()))
    _write(('\n'.join(records) + '\n').encode('ascii'))
    return 0


def cmd_degree(kind):
    if kind != 'approx':
        raise UsageError(f'unknown degree command {kind!r} (approx)')
    try:
        table = [int(v) for v in _require('table').split(',')]
    except ValueError:
        raise UsageError(f'--table must be comma separated integers, got {FLAGS.table!r}')
    if set(table) <= {0, 1}:
        table = to_sign_table(table)
    print(approx_degree(table, FLAGS.epsilon))
    return 0


COMMANDS = {
    'gen': cmd_gen,
    'lift': cmd_lift,
    'check': cmd_check,
    'rank': cmd_rank,
    'dt': cmd_dt,
    'prove': cmd_prove,
    'gap': cmd_gap,
    'degree': cmd_degree,
}


def dispatch(positional):
    if len(positional) != 2 or positional[0] not in COMMANDS:
        raise UsageError(
            f'expected "<command> <target>" with command in {sorted(COMMANDS)}, got {positional}'
        )
    return COMMANDS[positional[0]](positional[1])


def _exit_code(positional):
    try:
        return dispatch(positional)
    except UsageError as error:
        logging.error('usage error: %s', error)
        return 2
    except ValueError as error:
        # Malformed inputs, unverifiable trees and unsupported proofs.
        logging.error('%s', error)
        return 1


def run(argv):
    """ Parses argv (program name first) and runs one command; returns the exit code. """
    FLAGS.unparse_flags()
    try:
        positional = FLAGS(list(argv))
    except flags.Error as error:
        logging.error('usage error: %s', error)
        return 2
    return _exit_code(positional[1:])


def _parse_flags(argv):
    try:
        return FLAGS(argv)
    except flags.Error as error:
        sys.stderr.write(f'usage error: {error}\n')
        sys.exit(2)


def main(argv):
    sys.exit(_exit_code(argv[1:]))


if __name__ == '__main__':
    app.run(main, flags_parser=_parse_flags)
