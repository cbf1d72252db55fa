from flowsieve.app import run

run()
