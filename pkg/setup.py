#!/usr/bin/env python3
"""
Guided setup for hardy-plaplace: interpreter check, folders, packages,
.env template and a smoke run of the numerical kernel.
"""

import os
import platform
import subprocess
import sys

MIN_PYTHON = (3, 10)

# (variable, default, group) written to .env.template
ENV_SETTINGS = [
    ('HARDY_PLAPLACE_THREADS', '4', 'Runtime'),
    ('HARDY_PLAPLACE_LOG_LEVEL', 'WARNING', 'Runtime'),
    ('HARDY_PLAPLACE_SEED', '0', 'Runtime'),
    ('HARDY_PLAPLACE_OUTPUT_DIR', 'outputs', 'Runtime'),
    ('HARDY_PLAPLACE_ROOT_TOL', '1e-14', 'Numerical tolerances'),
    ('HARDY_PLAPLACE_ODE_RTOL', '1e-10', 'Numerical tolerances'),
    ('HARDY_PLAPLACE_ODE_ATOL', '1e-12', 'Numerical tolerances'),
    ('HARDY_PLAPLACE_QUAD_TOL', '1e-12', 'Numerical tolerances'),
    ('HARDY_PLAPLACE_GENSINE_NODES', '2048', 'Numerical tolerances'),
]


def python_ok() -> bool:
    found = sys.version_info[:3]
    label = ".".join(map(str, found))
    if found[:2] >= MIN_PYTHON:
        print(f"✓ Python {label}")
        return True
    print(f"✗ Python {label} is older than {MIN_PYTHON[0]}.{MIN_PYTHON[1]}")
    return False


def make_folders():
    for folder in ('data', 'outputs', os.path.join('outputs', 'figures')):
        os.makedirs(folder, exist_ok=True)
    print("✓ data/ and outputs/ ready")


def pip_install(requirements: str = 'requirements.txt') -> bool:
    if not os.path.exists(requirements):
        print(f"✗ {requirements} not found")
        return False
    print(f"Installing packages from {requirements}...")
    try:
        subprocess.check_call([sys.executable, '-m', 'pip', 'install', '-r', requirements])
    except subprocess.CalledProcessError as e:
        print(f"✗ pip failed with exit status {e.returncode}")
        return False
    print("✓ Packages installed")
    return True


def write_env_template(path: str = '.env.template'):
    lines = ["# hardy-plaplace settings; copy to .env and uncomment what you need"]
    group = None
    for name, default, section in ENV_SETTINGS:
        if section != group:
            lines += ["", f"# {section}"]
            group = section
        lines.append(f"# {name}={default}")
    with open(path, 'w') as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"✓ Wrote {path}")


def smoke_run() -> bool:
    """pi_2 must come out as pi and p = 2, N = 3 must have C_H = 1/4"""
    print("\nSmoke run...")
    try:
        import math

        from analysis.exponents import hardy_constants
        from analysis.specfun import build_gensine
        from config.settings import validate_config
    except ImportError as e:
        print(f"✗ Import error: {e}")
        return False

    checks = [
        ("settings", validate_config()),
        ("pi_2 = pi", abs(build_gensine(2.0).pi_p - math.pi) <= 1e-8),
        ("C_H(2, 3) = 1/4", abs(hardy_constants(2.0, 3)[0] - 0.25) <= 1e-15),
    ]
    for label, ok in checks:
        print(f"{'✓' if ok else '✗'} {label}")
    return all(ok for _, ok in checks)


def main():
    print("hardy-plaplace setup")
    print("=" * 45)

    if not python_ok() and '--force' not in sys.argv:
        print("Rerun with --force to continue anyway")
        sys.exit(1)
    make_folders()
    if '--no-install' not in sys.argv and not pip_install():
        sys.exit(1)
    write_env_template()
    passed = smoke_run()

    print("\n" + "=" * 45)
    if passed:
        print("Setup completed successfully!")
        print("\nNext steps:")
        print("1. Run: python main.py suite --quick")
        print("2. Run: pytest -m 'not slow'")
    else:
        print("Setup finished with problems; see the ✗ lines above")
    print(f"\nPlatform: {platform.system()} {platform.release()}, Python {platform.python_version()}")


if __name__ == "__main__":
    main()
