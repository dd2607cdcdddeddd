def test_public_interface() -> None:
    # the most frequent use
    import qetransport as qet

    assert callable(qet.run_simulation)
    assert callable(qet.parse_config)
    assert qet.__version__

    from qetransport import ChainSpec, NoiseSpec, Tcl2Generator, propagate

    assert callable(propagate)
    assert ChainSpec and NoiseSpec and Tcl2Generator


def test_all_names_exist() -> None:
    import qetransport

    for name in qetransport.__all__:
        assert hasattr(qetransport, name), name


def test_errors_share_builtin_bases() -> None:
    from qetransport import (
        ConfigError,
        NotConvergedError,
        NumericalError,
        SpecificationError,
        TailFitError,
        TrajectoryRangeError,
    )

    assert issubclass(ConfigError, ValueError)
    assert issubclass(SpecificationError, ValueError)
    assert issubclass(TrajectoryRangeError, ValueError)
    assert issubclass(NumericalError, ArithmeticError)
    assert issubclass(TailFitError, NotConvergedError)
