from eiregret.bench.cli import main

main()
