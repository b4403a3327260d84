struct Cell {
  virtual int weight() { return 1; }
};
struct Heavy : Cell {
  int weight() { return 5; }
};
int main() {
  Cell *cells[3];
  cells[0] = new Cell();
  cells[1] = new Heavy();
  cells[2] = new Heavy();
  int total = 0;
  for (int i = 0; i < 3; i++)
    total = total + cells[i]->weight();
  assert(total == 11);
  for (int i = 0; i < 3; i++)
    delete cells[i];
  return 0;
}
